"""Simplified three-fingered hand: geometry and forward kinematics.

The hand frame has the palm surface in the z = 0 plane with fingers
extending toward +z (the object side). Two coupled fingers sit at +x and
swing apart under the separation joint; one opposing finger sits at -x.
Each finger is a proximal and a distal cuboid link hinged at the finger
base; link direction at bending angle q is ``cos(q) * z + sin(q) * u`` for
inward axis u, so q = 0 points at the object and q = pi/2 lies flat inward.

Joint vector layout (7): [separation, proximal x3, distal x3], with finger
order (coupled +y, coupled -y, opposing).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rotations import quat_to_matrix

# State-vector link slot order; contacts are reported per slot.
LINK_NAMES = ("palm", "prox1", "prox2", "prox3", "dist1", "dist2", "dist3")
N_LINKS = 7
N_JOINTS = 7


@dataclass(frozen=True)
class LinkFrame:
    """An oriented cuboid in world coordinates."""

    center: np.ndarray
    rotation: np.ndarray  # world <- link, columns (length, width, thickness)
    half_extents: np.ndarray


@dataclass(frozen=True)
class HandConfig:
    palm_size: tuple[float, float, float] = (0.12, 0.12, 0.02)
    finger_base_x: float = 0.055
    finger_base_y: float = 0.03
    proximal_length: float = 0.075
    distal_length: float = 0.045
    link_width: float = 0.014
    link_thickness: float = 0.012
    distal_coupling: float = 0.4
    grasp_center_drop: float = 0.065  # palm plane to nominal object center, m
    close_step: float = 0.01  # rad per closing increment
    joint_limit: float = 3.0  # rad

    def finger_bases(self, separation: float) -> list[tuple[np.ndarray, np.ndarray]]:
        """(base position, inward unit direction) per finger, hand frame."""
        half = separation / 2.0
        out = []
        for side in (+1.0, -1.0):
            base = np.array([self.finger_base_x, side * self.finger_base_y, 0.0])
            angle = -side * half  # positive separation spreads the pair apart
            u = np.array([-math.cos(angle), -math.sin(angle), 0.0])  # Rz(angle) @ (-1,0,0)
            out.append((base, u))
        out.append((np.array([-self.finger_base_x, 0.0, 0.0]), np.array([1.0, 0.0, 0.0])))
        return out


def _cross3(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.array([a[1] * b[2] - a[2] * b[1],
                     a[2] * b[0] - a[0] * b[2],
                     a[0] * b[1] - a[1] * b[0]])


def _finger_link(start: np.ndarray, u: np.ndarray, angle: float, length: float,
                 width: float, thickness: float) -> tuple[LinkFrame, np.ndarray]:
    """Hand-frame cuboid for one link starting at ``start``; returns its tip."""
    direction = np.array([math.sin(angle) * u[0], math.sin(angle) * u[1], math.cos(angle)])
    axis_w = _cross3(np.array([0.0, 0.0, 1.0]), u)  # hinge axis, unit
    axis_t = _cross3(direction, axis_w)
    rot = np.column_stack([direction, axis_w, axis_t])
    center = start + direction * (length / 2.0)
    frame = LinkFrame(center=center, rotation=rot,
                      half_extents=np.array([length / 2.0, width / 2.0, thickness / 2.0]))
    return frame, start + direction * length


def link_frames(cfg: HandConfig, wrist_pos: np.ndarray, wrist_quat: np.ndarray,
                joints: np.ndarray) -> list[LinkFrame]:
    """World-frame cuboids for all 7 links in slot order."""
    r_w = quat_to_matrix(wrist_quat)
    frames_hand: list[LinkFrame] = []

    px, py, pz = cfg.palm_size
    frames_hand.append(
        LinkFrame(center=np.array([0.0, 0.0, -pz / 2.0]), rotation=np.eye(3),
                  half_extents=np.array([px / 2.0, py / 2.0, pz / 2.0]))
    )

    bases = cfg.finger_bases(float(joints[0]))
    tips = []
    for i, (base, u) in enumerate(bases):
        frame, tip = _finger_link(base, u, float(joints[1 + i]), cfg.proximal_length,
                                  cfg.link_width, cfg.link_thickness)
        frames_hand.append(frame)
        tips.append((tip, u))
    for i, (tip, u) in enumerate(tips):
        angle = float(joints[1 + i]) + float(joints[4 + i])
        frame, _ = _finger_link(tip, u, angle, cfg.distal_length,
                                cfg.link_width, cfg.link_thickness)
        frames_hand.append(frame)

    world = []
    for f in frames_hand:
        world.append(
            LinkFrame(center=wrist_pos + r_w @ f.center, rotation=r_w @ f.rotation,
                      half_extents=f.half_extents)
        )
    return world


_UNIT_GRIDS: dict[int, np.ndarray] = {}


def _unit_grid(per_axis: int) -> np.ndarray:
    grid = _UNIT_GRIDS.get(per_axis)
    if grid is None:
        t = np.linspace(-1.0, 1.0, per_axis)
        gx, gy, gz = np.meshgrid(t, t, t, indexing="ij")
        grid = np.stack([gx.ravel(), gy.ravel(), gz.ravel()], axis=1)
        _UNIT_GRIDS[per_axis] = grid
    return grid


def link_sample_points(frame: LinkFrame, per_axis: int = 4) -> np.ndarray:
    """Deterministic world-frame sample grid spanning the link volume."""
    local = _unit_grid(per_axis) * frame.half_extents
    return frame.center + local @ frame.rotation.T
