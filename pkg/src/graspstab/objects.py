"""Parametric object primitives with signed distance fields.

Shapes live in their local frame: cuboids axis-aligned, cylinders with the
axis along z, spheres centered at the origin. Signed distance is negative
inside the object.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

MASS_RANGE = (0.1, 0.4)  # kg


class ObjectShape(str, enum.Enum):
    CUBOID = "cuboid"
    CYLINDER = "cylinder"
    SPHERE = "sphere"


@dataclass(frozen=True)
class ObjectSpec:
    """One graspable primitive.

    ``dimensions`` are full extents in meters: (lx, ly, lz) for cuboids,
    (radius, height) for cylinders, (radius,) for spheres.
    """

    shape: ObjectShape
    dimensions: tuple[float, ...]
    mass: float

    def __post_init__(self):
        expected = {ObjectShape.CUBOID: 3, ObjectShape.CYLINDER: 2, ObjectShape.SPHERE: 1}
        if len(self.dimensions) != expected[self.shape]:
            raise ValueError(f"{self.shape.value} needs {expected[self.shape]} dimensions")
        if min(self.dimensions) <= 0:
            raise ValueError("dimensions must be positive")
        if not (MASS_RANGE[0] <= self.mass <= MASS_RANGE[1]):
            raise ValueError(f"mass must be within {MASS_RANGE} kg")

    @property
    def half_height(self) -> float:
        if self.shape is ObjectShape.CUBOID:
            return self.dimensions[2] / 2.0
        if self.shape is ObjectShape.CYLINDER:
            return self.dimensions[1] / 2.0
        return self.dimensions[0]

    @property
    def bounding_radius(self) -> float:
        if self.shape is ObjectShape.CUBOID:
            return float(np.linalg.norm(self.dimensions)) / 2.0
        if self.shape is ObjectShape.CYLINDER:
            r, h = self.dimensions
            return float(np.hypot(r, h / 2.0))
        return self.dimensions[0]


@dataclass(frozen=True)
class SizeEnvelopes:
    """Per-shape sampling ranges for object extents, in meters.

    Scaled for a hand with a roughly 11 cm finger cage; each range is
    (minimum, maximum) over the corresponding dimension.
    """

    cuboid_side: tuple[float, float] = (0.04, 0.08)
    cylinder_radius: tuple[float, float] = (0.02, 0.04)
    cylinder_height: tuple[float, float] = (0.06, 0.12)
    sphere_radius: tuple[float, float] = (0.025, 0.045)


def sdf(spec: ObjectSpec, pts: np.ndarray) -> np.ndarray:
    """Signed distance of local-frame points ``pts`` (N, 3) to the surface."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    if spec.shape is ObjectShape.SPHERE:
        return np.linalg.norm(pts, axis=1) - spec.dimensions[0]
    if spec.shape is ObjectShape.CUBOID:
        half = np.asarray(spec.dimensions) / 2.0
        q = np.abs(pts) - half
        outside = np.linalg.norm(np.clip(q, 0.0, None), axis=1)
        inside = np.minimum(q.max(axis=1), 0.0)
        return outside + inside
    radius, height = spec.dimensions
    d_r = np.linalg.norm(pts[:, :2], axis=1) - radius
    d_z = np.abs(pts[:, 2]) - height / 2.0
    q = np.stack([d_r, d_z], axis=1)
    outside = np.linalg.norm(np.clip(q, 0.0, None), axis=1)
    inside = np.minimum(q.max(axis=1), 0.0)
    return outside + inside


def sdf_gradient(spec: ObjectSpec, p: np.ndarray) -> np.ndarray:
    """Unit outward gradient of the signed distance at a single local point."""
    p = np.asarray(p, dtype=float)
    if spec.shape is ObjectShape.SPHERE:
        n = np.linalg.norm(p)
        if n < 1e-12:
            return np.array([0.0, 0.0, 1.0])
        return p / n

    if spec.shape is ObjectShape.CUBOID:
        half = np.asarray(spec.dimensions) / 2.0
        q = np.abs(p) - half
        if (q > 0.0).any():
            g = np.clip(q, 0.0, None) * np.sign(np.where(p == 0.0, 1.0, p))
            return g / np.linalg.norm(g)
        axis = int(np.argmax(q))
        g = np.zeros(3)
        g[axis] = 1.0 if p[axis] >= 0.0 else -1.0
        return g

    radius, height = spec.dimensions
    r_xy = float(np.hypot(p[0], p[1]))
    radial = np.array([1.0, 0.0, 0.0]) if r_xy < 1e-12 else np.array([p[0] / r_xy, p[1] / r_xy, 0.0])
    d_r = r_xy - radius
    d_z = abs(p[2]) - height / 2.0
    axial = np.array([0.0, 0.0, 1.0 if p[2] >= 0.0 else -1.0])
    if d_r > 0.0 or d_z > 0.0:
        g = max(d_r, 0.0) * radial + max(d_z, 0.0) * axial
        return g / np.linalg.norm(g)
    return radial if d_r >= d_z else axial
