"""Episodic grasp refinement environment.

An episode runs at most 15 refine + 6 lift + 6 hold = 27 steps. Refinement
ends early when the object shifts more than the budget or a finger joint
passes its limit; lifting ends early when the quasi-static hold check fails
(the object "drops"). The hold check substitutes for a dynamic drop test:
it requires at least two contacts, force closure with a margin, and a
positive worst-case slip margin against the carry task.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .contacts import Contact, FrictionModel
from .hand import N_LINKS
from .metrics import GraspSnapshot, delta_task, epsilon_force
from .rewards import RewardFramework, RewardVariant, step_reward, terminal_reward
from .scene import (
    ActionLimits,
    SceneParams,
    SceneState,
    WristError,
    apply_action,
    close_fingers,
    detect_link_contacts,
    holding_task_wrenches,
    initial_scene,
    snapshot_from_links,
)
from .objects import ObjectSpec


class EpisodeFinished(RuntimeError):
    """step() was called after the episode ended."""


class Stage(str, enum.Enum):
    REFINE = "refine"
    LIFT = "lift"
    HOLD = "hold"


class Termination(str, enum.Enum):
    COMPLETED = "completed"
    OBJECT_SHIFTED = "object_shifted"
    JOINT_LIMIT = "joint_limit"
    DROPPED_AT_LIFT = "dropped_at_lift"


class SensingFramework(str, enum.Enum):
    """Which contact information enters the agent's state vector."""

    FULL = "full"  # position + normal + force vector per link
    NORMAL = "normal"  # position + normal + normal-force magnitude
    BINARY = "binary"  # position + normal + contact flag
    NONE = "none"  # joint positions only

    @property
    def block_size(self) -> int:
        return {self.FULL: 9, self.NORMAL: 7, self.BINARY: 7, self.NONE: 0}[self]

    @property
    def state_dim(self) -> int:
        return 7 + N_LINKS * self.block_size


@dataclass(frozen=True)
class EpisodeConfig:
    refine_steps: int = 15
    lift_steps: int = 6
    hold_steps: int = 6
    lift_height: float = 0.15  # m
    shift_limit: float = 0.10  # m
    joint_limit: float = 3.0  # rad
    reward: RewardFramework = field(
        default_factory=lambda: RewardFramework(RewardVariant.EPSILON_AND_DELTA)
    )
    sensing: SensingFramework = SensingFramework.FULL
    scene: SceneParams = field(default_factory=SceneParams)
    limits: ActionLimits = field(default_factory=ActionLimits)
    hold_eps_min: float = 0.01  # N, force-closure margin for the hold check
    task_wrenches: tuple[tuple[float, ...], ...] | None = None  # None: carry wrench
    seed: int = 0

    @property
    def max_steps(self) -> int:
        return self.refine_steps + self.lift_steps + self.hold_steps

    def tasks_for(self, spec: ObjectSpec) -> np.ndarray:
        if self.task_wrenches is not None:
            return np.asarray(self.task_wrenches, dtype=float).reshape(-1, 6)
        return holding_task_wrenches(spec)


@dataclass
class StepRecord:
    step: int
    stage: Stage
    action: np.ndarray
    state: np.ndarray
    reward: float


@dataclass
class EpisodeResult:
    records: list[StepRecord]
    lift_success: bool
    hold_success: bool
    termination: Termination

    @property
    def total_reward(self) -> float:
        return float(sum(r.reward for r in self.records))

    @property
    def step_count(self) -> int:
        return len(self.records)


def encode_state(joints: np.ndarray, link_contacts: list[Contact | None],
                 sensing: SensingFramework) -> np.ndarray:
    """Agent observation: 7 joints then one block per link slot.

    Links without contact contribute zero blocks. Block layouts:
    full = position, normal, force; normal = position, normal, |f_n|;
    binary = position, normal, flag; none = no blocks.
    """
    parts = [np.asarray(joints, dtype=float).reshape(7)]
    if sensing is not SensingFramework.NONE:
        for c in link_contacts:
            if c is None:
                parts.append(np.zeros(sensing.block_size))
                continue
            if sensing is SensingFramework.FULL:
                parts.append(np.concatenate([c.position, c.normal, c.force]))
            elif sensing is SensingFramework.NORMAL:
                f_n = float(c.force @ c.normal)
                parts.append(np.concatenate([c.position, c.normal, [f_n]]))
            else:
                parts.append(np.concatenate([c.position, c.normal, [1.0]]))
    return np.concatenate(parts)


def reconstruct_snapshot(state: np.ndarray, sensing: SensingFramework,
                         friction: FrictionModel) -> GraspSnapshot:
    """Best-effort snapshot from an encoded state vector.

    This is what a metric-driven policy can know from its observation alone:
    contact forces degrade with the sensing framework (normal-only, unit
    placeholder for binary, nothing for none) and the center of mass is
    approximated by the contact centroid.
    """
    state = np.asarray(state, dtype=float)
    contacts: list[Contact] = []
    if sensing is not SensingFramework.NONE:
        bs = sensing.block_size
        for k in range(N_LINKS):
            block = state[7 + k * bs: 7 + (k + 1) * bs]
            if not np.any(block):
                continue
            position, normal = block[0:3], block[3:6]
            nn = np.linalg.norm(normal)
            if nn < 1e-9:
                continue
            normal = normal / nn
            if sensing is SensingFramework.FULL:
                force = block[6:9]
            elif sensing is SensingFramework.NORMAL:
                force = block[6] * normal
            else:
                force = normal if block[6] > 0.5 else np.zeros(3)
            contacts.append(Contact(position=position, normal=normal, force=force))
    com = np.mean([c.position for c in contacts], axis=0) if contacts else np.zeros(3)
    return GraspSnapshot(contacts=contacts, com=com, friction=friction)


def evaluate_hold(snapshot: GraspSnapshot, tasks: np.ndarray, eps_min: float = 0.01) -> bool:
    """Quasi-static surrogate for "the object is still in the hand"."""
    if snapshot.contact_count < 2:
        return False
    if epsilon_force(snapshot) <= eps_min:
        return False
    return delta_task(snapshot, tasks) > 0.0


class GraspRefineEnv:
    """Single-episode environment; instances are independent and not shared
    across threads. Identical (config, case, action sequence) yields bitwise
    identical results; an optional reset cache reuses the deterministic
    finger-closing result across episodes of the same case.
    """

    def __init__(self, config: EpisodeConfig | None = None,
                 reset_cache: dict | None = None):
        self.config = config or EpisodeConfig()
        self._reset_cache = reset_cache
        self._scene: SceneState | None = None
        self._done = True
        self._records: list[StepRecord] = []

    # -- episode lifecycle ---------------------------------------------------

    def reset(self, case: tuple[ObjectSpec, WristError]) -> np.ndarray:
        spec, error = case
        self._tasks = self.config.tasks_for(spec)
        key = self._case_key(spec, error)
        cached = self._reset_cache.get(key) if self._reset_cache is not None else None
        if cached is None:
            scene = initial_scene(spec, error, self.config.scene)
            scene, _ = close_fingers(scene, self.config.scene)
            if self._reset_cache is not None:
                self._reset_cache[key] = scene.copy()
        else:
            scene = cached.copy()
        # Closing may push the object around; the shift budget is for the
        # refinement stage only.
        scene.accumulated_object_shift = 0.0
        self._scene = scene
        self._refresh_contacts()
        self._step_idx = 0
        self._done = False
        self._records = []
        self._lift_success = False
        self._hold_success = False
        self._termination: Termination | None = None
        return self._state

    def step(self, action: np.ndarray) -> tuple[np.ndarray, float, bool, dict[str, Any]]:
        if self._done:
            raise EpisodeFinished("episode is over; call reset()")
        cfg = self.config
        stage = self.stage
        a = np.asarray(action, dtype=float).reshape(9)

        if stage is Stage.REFINE:
            self._scene, _ = apply_action(self._scene, a, cfg.limits, cfg.scene)
            self._refresh_contacts()
            if np.any(np.abs(self._scene.joints[1:]) > cfg.joint_limit):
                self._finish(Termination.JOINT_LIMIT)
            elif self._scene.accumulated_object_shift > cfg.shift_limit:
                self._finish(Termination.OBJECT_SHIFTED)
        elif stage is Stage.LIFT:
            lifted = a.copy()
            lifted[5] = 0.0  # wrist z is hard-coded during lifting
            self._scene, _ = apply_action(self._scene, lifted, cfg.limits, cfg.scene,
                                          carry_object=True)
            dz = cfg.lift_height / cfg.lift_steps
            self._scene.wrist_pos[2] += dz
            self._scene.object_pos[2] += dz
            self._scene.support_z = None  # off the support once lifting starts
            self._refresh_contacts()
            if not self._hold_ok():
                self._finish(Termination.DROPPED_AT_LIFT)
            elif self._step_idx + 1 == cfg.refine_steps + cfg.lift_steps:
                self._lift_success = True
        else:
            self._scene, _ = apply_action(self._scene, a, cfg.limits, cfg.scene,
                                          carry_object=True)
            self._refresh_contacts()

        self._step_idx += 1
        if self._termination is None and self._step_idx >= cfg.max_steps:
            self._hold_success = self._hold_ok()
            self._finish(Termination.COMPLETED)

        reward = self._step_reward()
        self._records.append(StepRecord(step=self._step_idx, stage=stage,
                                        action=a.copy(), state=self._state.copy(),
                                        reward=reward))
        info = {
            "stage": stage.value,
            "contacts": self._snapshot.contact_count,
            "object_shift": self._scene.accumulated_object_shift,
            "termination": self._termination.value if self._termination else None,
        }
        return self._state, reward, self._done, info

    def result(self) -> EpisodeResult:
        if not self._done or self._termination is None:
            raise EpisodeFinished("episode still running")
        return EpisodeResult(records=list(self._records),
                             lift_success=self._lift_success,
                             hold_success=self._hold_success,
                             termination=self._termination)

    # -- observation and lookahead -------------------------------------------

    @property
    def stage(self) -> Stage:
        cfg = self.config
        if self._step_idx < cfg.refine_steps:
            return Stage.REFINE
        if self._step_idx < cfg.refine_steps + cfg.lift_steps:
            return Stage.LIFT
        return Stage.HOLD

    @property
    def snapshot(self) -> GraspSnapshot:
        return self._snapshot

    @property
    def tasks(self) -> np.ndarray:
        return self._tasks

    def lookahead_state(self, action: np.ndarray) -> np.ndarray:
        """Observation after applying ``action`` to a copy (no episode advance).

        The candidate is evaluated with refine-stage kinematics; the lift
        override and carry behavior stay internal to step().
        """
        scene, _ = apply_action(self._scene, action, self.config.limits, self.config.scene,
                                carry_object=self.stage is not Stage.REFINE)
        links = detect_link_contacts(scene, self.config.scene)
        return encode_state(scene.joints, links, self.config.sensing)

    # -- internals -------------------------------------------------------------

    def _case_key(self, spec: ObjectSpec, error: WristError):
        return (
            spec.shape.value, spec.dimensions, spec.mass,
            tuple(error.translation), tuple(error.rotation),
            self.config.scene,
        )

    def _refresh_contacts(self) -> None:
        self._links = detect_link_contacts(self._scene, self.config.scene)
        self._snapshot = snapshot_from_links(self._links, self._scene, self.config.scene)
        self._state = encode_state(self._scene.joints, self._links, self.config.sensing)

    def _hold_ok(self) -> bool:
        return evaluate_hold(self._snapshot, self._tasks, self.config.hold_eps_min)

    def _finish(self, termination: Termination) -> None:
        self._done = True
        self._termination = termination

    def _step_reward(self) -> float:
        fw = self.config.reward
        if fw.variant is RewardVariant.BINARY:
            if self._done:
                return terminal_reward(fw, self._hold_success)
            return 0.0
        return step_reward(fw, self._snapshot, self._tasks)


def run_episode(env: GraspRefineEnv, policy, case) -> EpisodeResult:
    """Roll one episode of ``policy`` in ``env`` on ``case``."""
    state = env.reset(case)
    policy.begin_episode()
    done = False
    while not done:
        action = policy.act(state, env.stage)
        state, _, done, _ = env.step(action)
    result = env.result()
    policy.observe_episode(result)
    return result
