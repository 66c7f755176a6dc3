"""3-D computational geometry: convex hulls, origin-to-plane distances, tangent frames.

Only solid (full-dimensional) hulls in R^3 are supported; inputs spanning fewer
than 3 dimensions raise :class:`DegenerateInput`. All functions are pure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

Vec3 = np.ndarray  # shape (3,), float64

# Absolute merge radius for duplicate input points. Friction-cone edges from
# symmetric grasps coincide frequently, so dedup runs before hull construction.
DEDUP_TOL = 1e-10


class DegenerateInput(ValueError):
    """Points span fewer than 3 dimensions; no solid hull exists."""


class ZeroNormal(ValueError):
    """A (near-)zero direction vector cannot define a tangent frame."""


@dataclass(frozen=True)
class Facet:
    """One triangular hull facet: plane equation ``normal . x = offset``."""

    indices: tuple[int, int, int]
    normal: Vec3  # outward, unit length
    offset: float


@dataclass(frozen=True)
class Hull3:
    """Convex hull of a 3-D point set with outward-oriented triangular facets."""

    vertices: np.ndarray  # (V, 3)
    facets: list[Facet]

    def diameter(self) -> float:
        lo = self.vertices.min(axis=0)
        hi = self.vertices.max(axis=0)
        return float(np.linalg.norm(hi - lo))


def _dedup(points: np.ndarray) -> np.ndarray:
    """Drop points closer than DEDUP_TOL (grid snap), keeping first occurrences."""
    seen: dict[tuple[int, int, int], None] = {}
    keep = []
    for i, p in enumerate(points):
        key = tuple(int(round(c / DEDUP_TOL)) for c in p)
        if key not in seen:
            seen[key] = None
            keep.append(i)
    return points[keep]


class _HullBuilder:
    """Incremental insertion hull (quickhull-style visibility walk).

    Facets live in parallel growing arrays with an alive mask; orientation is
    fixed against an interior reference point so horizon edge order never
    matters.
    """

    def __init__(self, pts: np.ndarray):
        self.pts = pts
        scale = float(np.abs(pts).max())
        self.eps = 1e-12 * max(scale, 1e-30)
        self.thin_tol = 1e-9 * max(scale, 1e-30)
        cap = 8 * len(pts) + 16
        self.tris = np.zeros((cap, 3), dtype=np.int64)
        self.normals = np.zeros((cap, 3))
        self.offsets = np.zeros(cap)
        self.alive = np.zeros(cap, dtype=bool)
        self.count = 0
        self.interior = np.zeros(3)
        self._init_simplex()

    def _grow(self) -> None:
        cap = len(self.offsets) * 2
        self.tris = np.resize(self.tris, (cap, 3))
        self.normals = np.resize(self.normals, (cap, 3))
        self.offsets = np.resize(self.offsets, cap)
        alive = np.zeros(cap, dtype=bool)
        alive[: self.count] = self.alive[: self.count]
        self.alive = alive

    def _init_simplex(self) -> None:
        pts = self.pts
        order = np.lexsort((pts[:, 2], pts[:, 1], pts[:, 0]))
        i0 = int(order[0])
        d = np.linalg.norm(pts - pts[i0], axis=1)
        i1 = int(np.argmax(d))
        if d[i1] <= self.thin_tol:
            raise DegenerateInput("all points coincide")
        axis = pts[i1] - pts[i0]
        axis /= np.linalg.norm(axis)
        rej = pts - pts[i0] - np.outer((pts - pts[i0]) @ axis, axis)
        d2 = np.linalg.norm(rej, axis=1)
        i2 = int(np.argmax(d2))
        if d2[i2] <= self.thin_tol:
            raise DegenerateInput("points are collinear")
        n = np.cross(pts[i1] - pts[i0], pts[i2] - pts[i0])
        n /= np.linalg.norm(n)
        h = (pts - pts[i0]) @ n
        i3 = int(np.argmax(np.abs(h)))
        if abs(h[i3]) <= self.thin_tol:
            raise DegenerateInput("points are coplanar")

        self.interior = (pts[i0] + pts[i1] + pts[i2] + pts[i3]) / 4.0
        for tri in ((i0, i1, i2), (i0, i1, i3), (i0, i2, i3), (i1, i2, i3)):
            self._add_facet(tri)
        self.seed = {i0, i1, i2, i3}

    def _make_facet(self, tri: tuple[int, int, int]):
        a = self.pts[tri[0]]
        ab = self.pts[tri[1]] - a
        ac = self.pts[tri[2]] - a
        n = np.array([ab[1] * ac[2] - ab[2] * ac[1],
                      ab[2] * ac[0] - ab[0] * ac[2],
                      ab[0] * ac[1] - ab[1] * ac[0]])
        nn = float(np.sqrt(n @ n))
        if nn <= self.thin_tol * self.thin_tol:
            raise DegenerateInput("degenerate facet")
        n = n / nn
        off = float(n @ a)
        if float(n @ self.interior) > off:
            n, off = -n, -off
        return tri, n, off

    def _add_facet(self, tri: tuple[int, int, int]) -> None:
        tri, n, off = self._make_facet(tri)
        if self.count == len(self.offsets):
            self._grow()
        k = self.count
        self.tris[k] = tri
        self.normals[k] = n
        self.offsets[k] = off
        self.alive[k] = True
        self.count += 1

    def insert(self, pi: int) -> None:
        p = self.pts[pi]
        for eps in (self.eps, self.eps * 100.0):
            ids = np.nonzero(self.alive[: self.count])[0]
            dist = self.normals[ids] @ p - self.offsets[ids]
            strict = set(ids[dist > eps].tolist())
            if not strict:
                return  # point already inside (or on) the hull
            near = set(ids[dist > -eps].tolist())

            edge_map: dict[tuple[int, int], list[int]] = {}
            for i in ids.tolist():
                a, b, c = self.tris[i].tolist()
                for e in ((a, b), (b, c), (c, a)):
                    edge_map.setdefault((min(e), max(e)), []).append(i)

            # Flood the visible set from strictly-visible facets across shared
            # edges into eps-coplanar neighbours; keeps the horizon simple when
            # the new point lies in the plane of existing facets.
            visible = set(strict)
            frontier = list(strict)
            while frontier:
                f = frontier.pop()
                a, b, c = self.tris[f].tolist()
                for e in ((a, b), (b, c), (c, a)):
                    for g in edge_map[(min(e), max(e))]:
                        if g not in visible and g in near:
                            visible.add(g)
                            frontier.append(g)

            horizon: dict[tuple[int, int], int] = {}
            for f in visible:
                a, b, c = self.tris[f].tolist()
                for e in ((a, b), (b, c), (c, a)):
                    key = (min(e), max(e))
                    horizon[key] = horizon.get(key, 0) + 1
            rim = [e for e, cnt in horizon.items() if cnt == 1]
            if not rim:
                return  # visible set closed on itself: nothing to attach

            # Stage replacement facets first; a sliver facet from a
            # near-coplanar horizon aborts cleanly and retries with a wider
            # coplanarity band.
            try:
                staged = [self._make_facet((a, b, pi)) for a, b in rim]
            except DegenerateInput:
                continue
            for f in visible:
                self.alive[f] = False
            for tri, n, off in staged:
                if self.count == len(self.offsets):
                    self._grow()
                k = self.count
                self.tris[k] = tri
                self.normals[k] = n
                self.offsets[k] = off
                self.alive[k] = True
                self.count += 1
            return
        raise DegenerateInput("could not attach point %d" % pi)

    def finish(self) -> Hull3:
        ids = np.nonzero(self.alive[: self.count])[0]
        used: list[int] = []
        remap: dict[int, int] = {}
        for i in ids:
            for k in self.tris[i].tolist():
                if k not in remap:
                    remap[k] = len(used)
                    used.append(k)
        vertices = self.pts[used]
        facets = []
        for i in ids:
            a, b, c = self.tris[i].tolist()
            facets.append(
                Facet(
                    indices=(remap[a], remap[b], remap[c]),
                    normal=self.normals[i].copy(),
                    offset=float(self.offsets[i]),
                )
            )
        return Hull3(vertices=vertices, facets=facets)


def convex_hull_3d(points: np.ndarray) -> Hull3:
    """Convex hull of ``points`` (array-like, shape (N, 3)).

    Deterministic for identical input ordering. Raises :class:`DegenerateInput`
    when the points span fewer than 3 dimensions (fewer than 4 affinely
    independent points after dedup), which downstream maps to a zero metric.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError("expected an (N, 3) array of points")
    if not np.isfinite(pts).all():
        raise ValueError("points must be finite")
    pts = _dedup(pts)
    if len(pts) < 4:
        raise DegenerateInput("need at least 4 distinct points")
    builder = _HullBuilder(pts)
    for i in range(len(pts)):
        if i in builder.seed:
            continue
        builder.insert(i)
    return builder.finish()


def origin_strictly_inside(hull: Hull3, tol: float = 1e-12) -> bool:
    """True iff the origin is strictly inside every facet plane.

    An origin exactly on a facet counts as outside: a marginal grasp must not
    score as stable.
    """
    return all(f.offset > tol for f in hull.facets)


def min_boundary_distance(hull: Hull3) -> float:
    """Shortest distance from the origin to the hull boundary, 0 if not inside.

    With outward unit normals the origin-to-plane distance of a facet is its
    plane offset, so for an interior origin this is the smallest offset.
    """
    if not origin_strictly_inside(hull):
        return 0.0
    return min(f.offset for f in hull.facets)


def tangent_basis(normal: Vec3) -> tuple[Vec3, Vec3]:
    """Deterministic right-handed orthonormal triad completion (t1, t2, normal).

    Picks the world axis least aligned with the normal, orthogonalizes and
    normalizes; continuous except where the argmin axis switches.
    """
    n = np.asarray(normal, dtype=float)
    nn = np.linalg.norm(n)
    if nn < 1e-9:
        raise ZeroNormal("normal has near-zero length")
    n = n / nn
    axis = int(np.argmin(np.abs(n)))
    e = np.zeros(3)
    e[axis] = 1.0
    t1 = e - (e @ n) * n
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(n, t1)
    return t1, t2
