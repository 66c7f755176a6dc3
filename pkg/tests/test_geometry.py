import numpy as np
import pytest

from graspstab.geometry import (
    DegenerateInput,
    ZeroNormal,
    convex_hull_3d,
    min_boundary_distance,
    origin_strictly_inside,
    tangent_basis,
)

from conftest import random_rotation, random_unit
from oracles import in_convex_hull_lp, origin_in_hull_lp

CUBE = np.array([[x, y, z] for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)], dtype=float)
TETRA = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)


def hull_edges(hull):
    edges = set()
    for f in hull.facets:
        a, b, c = f.indices
        for e in ((a, b), (b, c), (c, a)):
            edges.add((min(e), max(e)))
    return edges


def assert_hull_valid(hull, points):
    diam = hull.diameter()
    for f in hull.facets:
        assert abs(np.linalg.norm(f.normal) - 1.0) <= 1e-12
        overshoot = (np.asarray(points) @ f.normal - f.offset).max()
        assert overshoot <= 1e-9 * diam
    v, e, f = len(hull.vertices), len(hull_edges(hull)), len(hull.facets)
    assert v - e + f == 2


def random_ball_points(rng, n):
    dirs = rng.normal(size=(n, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    return dirs * rng.uniform(0.0, 1.0, (n, 1)) ** (1.0 / 3.0)


class TestConvexHull:
    def test_cube(self):
        hull = convex_hull_3d(CUBE)
        assert len(hull.vertices) == 8
        assert len(hull.facets) == 12
        assert_hull_valid(hull, CUBE)

    def test_tetrahedron(self):
        hull = convex_hull_3d(TETRA)
        assert len(hull.vertices) == 4
        assert len(hull.facets) == 4
        assert_hull_valid(hull, TETRA)

    def test_random_ball_membership_and_vertices(self, rng):
        pts = random_ball_points(rng, 100)
        hull = convex_hull_3d(pts)
        assert_hull_valid(hull, pts)
        # LP oracle: a point is a hull vertex iff it is not a convex
        # combination of the remaining points.
        hull_set = {tuple(v) for v in hull.vertices}
        for i, p in enumerate(pts):
            others = np.delete(pts, i, axis=0)
            expressible = in_convex_hull_lp(p, others)
            assert (tuple(p) in hull_set) == (not expressible)

    def test_interior_points_do_not_change_hull(self, rng):
        pts = random_ball_points(rng, 60)
        hull = convex_hull_3d(pts)
        with_interior = np.vstack([pts, random_ball_points(rng, 40) * 0.1])
        hull2 = convex_hull_3d(with_interior)
        assert {tuple(v) for v in hull.vertices} == {tuple(v) for v in hull2.vertices}

    def test_deterministic_output(self, rng):
        pts = random_ball_points(rng, 50)
        h1 = convex_hull_3d(pts)
        h2 = convex_hull_3d(pts.copy())
        assert [f.indices for f in h1.facets] == [f.indices for f in h2.facets]
        for f1, f2 in zip(h1.facets, h2.facets):
            assert np.array_equal(f1.normal, f2.normal)
            assert f1.offset == f2.offset

    def test_duplicate_points_are_merged(self):
        hull = convex_hull_3d(np.vstack([CUBE, CUBE, CUBE[:3] + 1e-13]))
        assert len(hull.vertices) == 8

    @pytest.mark.parametrize(
        "points",
        [
            CUBE[:3],  # too few
            np.zeros((6, 3)),  # all coincident
            np.outer(np.arange(8.0), [1.0, 2.0, 0.5]),  # collinear
            np.array([[x, y, 0.0] for x in (-1, 0, 1) for y in (-1, 0, 1)]),  # coplanar
        ],
    )
    def test_degenerate_inputs(self, points):
        with pytest.raises(DegenerateInput):
            convex_hull_3d(points)

    def test_non_finite_rejected(self):
        bad = CUBE.copy()
        bad[0, 0] = np.nan
        with pytest.raises(ValueError):
            convex_hull_3d(bad)


class TestMinBoundaryDistance:
    def test_cube_inscribed_sphere(self):
        assert min_boundary_distance(convex_hull_3d(CUBE)) == pytest.approx(1.0, abs=1e-12)

    def test_shifted_cube(self):
        hull = convex_hull_3d(CUBE + np.array([0.5, 0.0, 0.0]))
        assert min_boundary_distance(hull) == pytest.approx(0.5, abs=1e-12)

    def test_origin_outside_gives_zero(self):
        hull = convex_hull_3d(CUBE + np.array([3.0, 0.0, 0.0]))
        assert min_boundary_distance(hull) == 0.0

    def test_matches_facetwise_plane_distances(self, rng):
        for _ in range(20):
            pts = random_ball_points(rng, 40) + rng.uniform(-0.2, 0.2, 3)
            hull = convex_hull_3d(pts)
            expected = 0.0
            if all(f.offset > 1e-12 for f in hull.facets):
                # independent per-facet point-plane distance: |n.x0 - d| at x0 = 0
                expected = min(abs(f.normal @ np.zeros(3) - f.offset) for f in hull.facets)
            assert min_boundary_distance(hull) == pytest.approx(expected, abs=1e-15)

    def test_rotation_invariance(self, rng):
        pts = random_ball_points(rng, 50)
        base = min_boundary_distance(convex_hull_3d(pts))
        for _ in range(5):
            rot = random_rotation(rng)
            rotated = min_boundary_distance(convex_hull_3d(pts @ rot.T))
            assert rotated == pytest.approx(base, rel=1e-9)

    def test_scaling_linearity(self, rng):
        pts = random_ball_points(rng, 50)
        base = min_boundary_distance(convex_hull_3d(pts))
        for s in (0.25, 2.0, 128.0):
            scaled = min_boundary_distance(convex_hull_3d(pts * s))
            assert scaled == pytest.approx(base * s, rel=1e-12)

    def test_monotone_under_added_points(self, rng):
        pts = random_ball_points(rng, 30) + 0.05
        base = min_boundary_distance(convex_hull_3d(pts))
        if base == 0.0:
            pytest.skip("origin not inside the base hull")
        grown = np.vstack([pts, random_ball_points(rng, 30)])
        assert min_boundary_distance(convex_hull_3d(grown)) >= base - 1e-12


class TestOriginStrictlyInside:
    def test_cube(self):
        assert origin_strictly_inside(convex_hull_3d(CUBE))

    def test_halfspace_tetrahedron(self):
        shifted = TETRA + np.array([5.0, 0.0, 0.0])
        assert not origin_strictly_inside(convex_hull_3d(shifted))

    def test_origin_on_facet_counts_as_outside(self):
        lifted = CUBE + np.array([0.0, 0.0, 1.0])  # bottom face through origin
        assert not origin_strictly_inside(convex_hull_3d(lifted))
        assert min_boundary_distance(convex_hull_3d(lifted)) == 0.0

    def test_agrees_with_lp_oracle(self, rng):
        agree = 0
        for _ in range(50):
            pts = random_ball_points(rng, 20) + rng.uniform(-0.4, 0.4, 3)
            inside = origin_strictly_inside(convex_hull_3d(pts))
            assert inside == origin_in_hull_lp(pts)
            agree += 1
        assert agree == 50


class TestTangentBasis:
    @pytest.mark.parametrize("normal", [(0.0, 0.0, 1.0), (1.0, 0.0, 0.0), (0.0, 1.0, 0.0)])
    def test_axis_aligned(self, normal):
        n = np.asarray(normal)
        t1, t2 = tangent_basis(n)
        assert abs(t1 @ t2) <= 1e-12
        assert abs(t1 @ n) <= 1e-12
        assert abs(t2 @ n) <= 1e-12
        assert np.allclose(np.cross(t1, t2), n, atol=1e-12)

    def test_random_sweep(self, rng):
        for _ in range(1000):
            n = random_unit(rng)
            t1, t2 = tangent_basis(n)
            triad = np.column_stack([t1, t2, n])
            assert np.allclose(triad.T @ triad, np.eye(3), atol=1e-12)
            assert np.allclose(np.cross(t1, t2), n, atol=1e-12)

    def test_deterministic(self, rng):
        n = random_unit(rng)
        assert all(np.array_equal(a, b) for a, b in zip(tangent_basis(n), tangent_basis(n.copy())))

    def test_zero_normal(self):
        with pytest.raises(ZeroNormal):
            tangent_basis(np.array([0.0, 0.0, 1e-10]))
