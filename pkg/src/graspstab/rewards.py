"""Reward frameworks composed from the grasp stability metrics.

Three dense frameworks combine normalized metric values after every step;
the sparse binary framework pays 1 or 0 once, after the holding stage.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .metrics import GraspSnapshot, delta_cur, delta_task, epsilon_force, epsilon_torque


class BinaryHasNoDense(RuntimeError):
    """The binary framework emits no per-step reward."""


class RewardVariant(str, enum.Enum):
    EPSILON_AND_DELTA = "epsilon_and_delta"
    DELTA_ONLY = "delta_only"
    EPSILON_ONLY = "epsilon_only"
    BINARY = "binary"


@dataclass(frozen=True)
class RewardFramework:
    """Weights and normalizers for one reward configuration.

    Metrics are normalized by fixed scale constants and clamped at 1 before
    weighting, keeping rewards reproducible and episode-order independent
    (running statistics would not be). ``r = a1*(eps_f^ + eps_tau^) +
    a2*(delta_cur^ + delta_task^)`` with variant-dependent terms.
    """

    variant: RewardVariant
    alpha1: float = 5.0
    alpha2: float = 0.5
    eps_force_scale: float = 1.0  # N
    eps_torque_scale: float = 0.05  # Nm
    delta_scale: float = 1.0  # N; default matches 2*mu at mu=0.5

    def __post_init__(self):
        if self.alpha1 <= 0 or self.alpha2 <= 0:
            raise ValueError("alpha weights must be positive")
        if min(self.eps_force_scale, self.eps_torque_scale, self.delta_scale) <= 0:
            raise ValueError("normalizers must be positive")

    @classmethod
    def for_friction(cls, variant: RewardVariant, mu: float, **kwargs) -> "RewardFramework":
        """Framework with the delta normalizer tied to the friction coefficient."""
        return cls(variant=variant, delta_scale=max(2.0 * mu, 1e-6), **kwargs)

    @property
    def is_dense(self) -> bool:
        return self.variant is not RewardVariant.BINARY

    @property
    def max_step_reward(self) -> float:
        if self.variant is RewardVariant.EPSILON_ONLY:
            return 2.0 * self.alpha1
        if self.variant is RewardVariant.DELTA_ONLY:
            return 2.0 * self.alpha2
        if self.variant is RewardVariant.EPSILON_AND_DELTA:
            return 2.0 * self.alpha1 + 2.0 * self.alpha2
        return 1.0


def _clamp01(x: float, scale: float) -> float:
    return min(1.0, x / scale)


def step_reward(fw: RewardFramework, g: GraspSnapshot, tasks: np.ndarray) -> float:
    """Dense per-step reward for a snapshot; raises for the binary framework."""
    if fw.variant is RewardVariant.BINARY:
        raise BinaryHasNoDense("binary framework has no per-step reward")
    r = 0.0
    if fw.variant in (RewardVariant.EPSILON_AND_DELTA, RewardVariant.EPSILON_ONLY):
        eps_f = _clamp01(epsilon_force(g), fw.eps_force_scale)
        eps_t = _clamp01(epsilon_torque(g), fw.eps_torque_scale)
        r += fw.alpha1 * (eps_f + eps_t)
    if fw.variant in (RewardVariant.EPSILON_AND_DELTA, RewardVariant.DELTA_ONLY):
        d_cur = _clamp01(delta_cur(g), fw.delta_scale)
        d_task = _clamp01(delta_task(g, tasks), fw.delta_scale)
        r += fw.alpha2 * (d_cur + d_task)
    return r


def terminal_reward(fw: RewardFramework, held: bool) -> float:
    """End-of-episode reward: 1/0 for binary, 0 for dense frameworks."""
    if fw.variant is RewardVariant.BINARY:
        return 1.0 if held else 0.0
    return 0.0
