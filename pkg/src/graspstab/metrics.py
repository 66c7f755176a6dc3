"""Analytic grasp stability metrics.

Four scalar metrics over a grasp snapshot:

* ``epsilon_force``  - radius of the largest origin-centered ball inside the
  convex hull of all discretized friction-cone edges (largest-minimum
  resisted pure force, N).
* ``epsilon_torque`` - same construction over the induced torques r x e
  (largest-minimum resisted pure torque, Nm).
* ``delta_cur``      - force-weighted average tangential slip margin of the
  current contact forces (N).
* ``delta_task``     - worst-case ``delta`` after distributing each task
  wrench onto the contacts through the grasp-matrix pseudoinverse (N).

All metrics are total functions: degenerate wrench spaces and contactless
snapshots score 0 rather than raising, so they can run inside episode loops.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .contacts import Contact, FrictionModel, cone_edge_array, decompose_force, tangential_margin
from .geometry import DegenerateInput, Vec3, convex_hull_3d, min_boundary_distance

# Contacts carrying less force than this are excluded from the delta
# weighting: the weighted mean is undefined at zero total force and
# force-free contacts carry no stability information.
FORCE_EPS = 1e-9

# Singular values below this fraction of the largest are truncated when
# inverting the grasp matrix, keeping near-singular grasps stable.
SVD_RTOL = 1e-10


class NoContacts(ValueError):
    """Operation requires at least one contact."""


@dataclass(frozen=True)
class GraspSnapshot:
    """All contacts plus object center of mass and friction at one instant."""

    contacts: list[Contact]
    com: Vec3
    friction: FrictionModel

    def __post_init__(self):
        object.__setattr__(self, "com", np.asarray(self.com, dtype=float))

    @property
    def contact_count(self) -> int:
        return len(self.contacts)


class WrenchDistribution(NamedTuple):
    """Per-contact forces realizing a wrench, with the least-squares residual."""

    forces: np.ndarray  # (n_c, 3)
    residual: float
    exact: bool


def _skew(r: Vec3) -> np.ndarray:
    return np.array(
        [
            [0.0, -r[2], r[1]],
            [r[2], 0.0, -r[0]],
            [-r[1], r[0], 0.0],
        ]
    )


def grasp_matrix(g: GraspSnapshot) -> np.ndarray:
    """6 x 3n matrix mapping stacked contact forces to the net object wrench.

    Block i is [I3; skew(p_i - com)]: forces sum directly, torques are taken
    about the center of mass.
    """
    if g.contact_count == 0:
        raise NoContacts("grasp matrix needs at least one contact")
    blocks = []
    for c in g.contacts:
        top = np.eye(3)
        bottom = _skew(c.position - g.com)
        blocks.append(np.vstack([top, bottom]))
    return np.hstack(blocks)


def distribute_wrench(G: np.ndarray, w: np.ndarray, rtol: float = SVD_RTOL) -> WrenchDistribution:
    """Minimum-norm contact forces with ``G @ f = w`` (least squares if infeasible).

    Uses an SVD pseudoinverse with singular values below ``rtol * s_max``
    truncated to zero; when ``w`` has a component outside the range of ``G``
    the result is the least-squares minimizer and ``exact`` is False.
    """
    w = np.asarray(w, dtype=float).reshape(6)
    u, s, vt = np.linalg.svd(G, full_matrices=False)
    keep = s > rtol * s[0] if s[0] > 0 else np.zeros_like(s, dtype=bool)
    inv_s = np.where(keep, 1.0 / np.where(keep, s, 1.0), 0.0)
    f = vt.T @ (inv_s * (u.T @ w))
    residual = float(np.linalg.norm(G @ f - w))
    tol = 1e-8 * max(1.0, float(np.linalg.norm(w)))
    return WrenchDistribution(forces=f.reshape(-1, 3), residual=residual, exact=residual <= tol)


def _hull_metric(points: np.ndarray) -> float:
    """min_boundary_distance of the hull of ``points``; 0 on any degeneracy."""
    if len(points) < 4:
        return 0.0
    try:
        hull = convex_hull_3d(points)
    except DegenerateInput:
        return 0.0
    return min_boundary_distance(hull)


def epsilon_force(g: GraspSnapshot) -> float:
    """Largest-minimum resisted pure force (N); 0 outside force closure."""
    if g.contact_count == 0:
        return 0.0
    points = np.vstack([cone_edge_array(c, g.friction) for c in g.contacts])
    return _hull_metric(points)


def epsilon_torque(g: GraspSnapshot) -> float:
    """Largest-minimum resisted pure torque about the com (Nm)."""
    if g.contact_count == 0:
        return 0.0
    points = np.vstack(
        [np.cross(c.position - g.com, cone_edge_array(c, g.friction)) for c in g.contacts]
    )
    return _hull_metric(points)


def _weighted_margin(forces: np.ndarray, normals: np.ndarray, mu: float) -> float:
    """Force-weighted mean slip margin; contacts below FORCE_EPS are excluded."""
    num = 0.0
    den = 0.0
    for f, n in zip(forces, normals):
        mag = float(np.linalg.norm(f))
        if mag <= FORCE_EPS:
            continue
        num += mag * tangential_margin(f, n, mu)
        den += mag
    if den == 0.0:
        return 0.0
    return num / den


def delta_cur(g: GraspSnapshot) -> float:
    """Force-weighted average tangential slip margin of the current forces (N)."""
    if g.contact_count == 0:
        return 0.0
    forces = np.array([c.force for c in g.contacts])
    normals = np.array([c.normal for c in g.contacts])
    return _weighted_margin(forces, normals, g.friction.mu)


def delta_task(g: GraspSnapshot, tasks: np.ndarray) -> float:
    """Worst-case slip margin over the task wrench set (N).

    For each task wrench the additional contact forces come from the
    grasp-matrix pseudoinverse; internal grasp forces are assumed unchanged
    (hard contact model), so the task force at contact i is
    ``f_i,cur + f_i,add``. Returns 0 for contactless snapshots.
    """
    tasks = np.asarray(tasks, dtype=float).reshape(-1, 6)
    if tasks.shape[0] == 0:
        raise ValueError("task wrench set must be nonempty")
    if g.contact_count == 0:
        return 0.0
    G = grasp_matrix(g)
    current = np.array([c.force for c in g.contacts])
    normals = np.array([c.normal for c in g.contacts])
    worst = np.inf
    for w in tasks:
        dist = distribute_wrench(G, w)
        task_forces = current + dist.forces
        worst = min(worst, _weighted_margin(task_forces, normals, g.friction.mu))
    return worst
