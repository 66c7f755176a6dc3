"""Hard point contacts, friction-cone discretization, and slip safety margins."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Vec3, tangent_basis


@dataclass(frozen=True)
class Contact:
    """A hand-object contact in the world frame.

    ``normal`` is unit length and points into the object; ``force`` is the
    force applied by the hand on the object, in newtons.
    """

    position: Vec3
    normal: Vec3
    force: Vec3

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        object.__setattr__(self, "normal", np.asarray(self.normal, dtype=float))
        object.__setattr__(self, "force", np.asarray(self.force, dtype=float))
        if abs(np.linalg.norm(self.normal) - 1.0) > 1e-9:
            raise ValueError("contact normal must be unit length")
        if not (np.isfinite(self.position).all() and np.isfinite(self.force).all()):
            raise ValueError("contact position and force must be finite")


@dataclass(frozen=True)
class FrictionModel:
    """Coulomb friction coefficient and cone discretization edge count."""

    mu: float = 0.5
    edge_count: int = 8

    def __post_init__(self):
        if self.mu < 0:
            raise ValueError("mu must be >= 0")
        if self.edge_count < 3:
            raise ValueError("edge_count must be >= 3")


def cone_edge_array(contact: Contact, fm: FrictionModel) -> np.ndarray:
    """Discretized friction-cone boundary edges as an (m, 3) array.

    Edge j is ``n + mu * (cos(2*pi*j/m) * t1 + sin(2*pi*j/m) * t2)``, so every
    edge carries exactly unit normal force (the applicable-force bound) and
    lies on the cone surface. The angular offset is fixed at zero relative to
    the deterministic tangent basis, which makes the edge set for m a subset
    of the set for 2m.
    """
    t1, t2 = tangent_basis(contact.normal)
    n = contact.normal / np.linalg.norm(contact.normal)
    theta = 2.0 * math.pi * np.arange(fm.edge_count) / fm.edge_count
    return n + fm.mu * (np.cos(theta)[:, None] * t1 + np.sin(theta)[:, None] * t2)


def cone_edges(contact: Contact, fm: FrictionModel) -> list[Vec3]:
    """Friction-cone boundary edges as a list of 3-vectors."""
    return list(cone_edge_array(contact, fm))


def decompose_force(force: Vec3, normal: Vec3) -> tuple[float, Vec3]:
    """Split a force into its scalar normal component and tangential vector."""
    force = np.asarray(force, dtype=float)
    normal = np.asarray(normal, dtype=float)
    f_n = float(force @ normal)
    f_t = force - f_n * normal
    return f_n, f_t


def tangential_margin(force: Vec3, normal: Vec3, mu: float) -> float:
    """Tangential force the contact can still take before slipping, in N.

    ``max(0, mu * f_n - |f_t|)`` for a pushing contact; a pulling contact
    (negative normal component) has no safety margin. Forces outside the cone
    clamp to zero; the slip condition itself is reported by
    :func:`violates_cone`.
    """
    f_n, f_t = decompose_force(force, normal)
    if f_n < 0.0:
        return 0.0
    return max(0.0, mu * f_n - float(np.linalg.norm(f_t)))


def violates_cone(force: Vec3, normal: Vec3, mu: float, tol: float = 0.0) -> bool:
    """True when the force lies outside its friction cone (slipping contact)."""
    f_n, f_t = decompose_force(force, normal)
    if f_n < 0.0:
        return True
    return float(np.linalg.norm(f_t)) > mu * f_n + tol
