"""Derivative-free baseline policies over the grasp refinement environment.

All policies are deterministic functions of (seed, history) and share one
interface so an external learner can plug in unchanged.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .env import GraspRefineEnv, Stage, reconstruct_snapshot, run_episode
from .rewards import RewardFramework, step_reward
from .scene import ActionLimits

ACTION_DIM = 9


class BudgetExceeded(RuntimeError):
    """A planner would use more episodes than the configured budget."""


class Policy:
    """Decision rule (state, stage) -> 9-dim action within per-step bounds."""

    def begin_episode(self) -> None:
        pass

    def act(self, state: np.ndarray, stage: Stage) -> np.ndarray:
        raise NotImplementedError

    def observe_episode(self, result) -> None:
        pass


class ZeroPolicy(Policy):
    """No refinement: measures the quality of the initial grasp."""

    def act(self, state, stage):
        return np.zeros(ACTION_DIM)


class RandomPolicy(Policy):
    def __init__(self, seed: int = 0, limits: ActionLimits | None = None):
        self._rng = np.random.default_rng(seed)
        self._bounds = (limits or ActionLimits()).as_vector()

    def act(self, state, stage):
        return self._rng.uniform(-1.0, 1.0, ACTION_DIM) * self._bounds


class SequencePolicy(Policy):
    """Replays a fixed open-loop action sequence, holding the last action."""

    def __init__(self, sequence: np.ndarray):
        self._seq = np.asarray(sequence, dtype=float).reshape(-1, ACTION_DIM)
        self._t = 0

    def begin_episode(self):
        self._t = 0

    def act(self, state, stage):
        a = self._seq[min(self._t, len(self._seq) - 1)]
        self._t += 1
        return a


class GreedyMetricPolicy(Policy):
    """Coordinate ascent directly on the dense reward.

    At every step the policy scores 19 candidates (zero plus +/- one step for
    each of the 9 coordinates) through the environment's one-step lookahead,
    with ties broken toward the zero action. Scoring uses only information
    present in the encoded state: the candidate snapshot is reconstructed
    from the observation the sensing framework would produce, so poorer
    sensing degrades the policy's judgment, not the simulator's.
    """

    def __init__(self, env: GraspRefineEnv, reward: RewardFramework | None = None):
        reward = reward or env.config.reward
        if not reward.is_dense:
            raise ValueError("greedy policy needs a dense reward framework")
        self._env = env
        self._reward = reward

    def _score(self, candidate: np.ndarray) -> float:
        state = self._env.lookahead_state(candidate)
        snap = reconstruct_snapshot(state, self._env.config.sensing,
                                    self._env.config.scene.friction)
        return step_reward(self._reward, snap, self._env.tasks)

    def act(self, state, stage):
        bounds = self._env.config.limits.as_vector()
        best = np.zeros(ACTION_DIM)
        best_score = self._score(best)
        for k in range(ACTION_DIM):
            for sign in (1.0, -1.0):
                candidate = np.zeros(ACTION_DIM)
                candidate[k] = sign * bounds[k]
                score = self._score(candidate)
                if score > best_score:
                    best, best_score = candidate, score
        return best


@dataclass(frozen=True)
class CEMConfig:
    population: int = 20
    elite_frac: float = 0.25
    iterations: int = 5
    horizon: int = 27
    init_std_scale: float = 0.5  # fraction of the per-step bound
    noise_floor: float = 0.0
    episode_budget: int = 10_000
    seed: int = 0


@dataclass
class CEMPlan:
    sequence: np.ndarray
    elite_returns: list[float] = field(default_factory=list)  # mean per iteration
    mean_std: list[float] = field(default_factory=list)
    episodes_used: int = 0

    def policy(self) -> SequencePolicy:
        return SequencePolicy(self.sequence)


def cem_plan(env_factory, case, config: CEMConfig,
             limits: ActionLimits | None = None) -> CEMPlan:
    """Open-loop cross-entropy planning of one action sequence for ``case``.

    Samples sequences from a diagonal Gaussian, ranks them by summed episode
    reward on fresh deterministic environments, and refits mean and std on
    the elite fraction. Previous elites are carried into the next ranking
    (their returns are cached, the environment being deterministic), which
    makes the mean elite return non-decreasing across iterations.
    """
    if config.population * config.iterations > config.episode_budget:
        raise BudgetExceeded(
            f"{config.population * config.iterations} rollouts exceed budget "
            f"{config.episode_budget}"
        )
    if config.elite_frac >= 1.0:
        warnings.warn("elite_frac >= 1.0 keeps the whole population; CEM degenerates")
    n_elite = max(1, int(round(config.population * min(config.elite_frac, 1.0))))
    bounds = (limits or ActionLimits()).as_vector()

    rng = np.random.default_rng(config.seed)
    mean = np.zeros((config.horizon, ACTION_DIM))
    std = np.ones((config.horizon, ACTION_DIM)) * bounds * config.init_std_scale

    def rollout(seq: np.ndarray) -> float:
        env = env_factory()
        return run_episode(env, SequencePolicy(seq), case).total_reward

    plan = CEMPlan(sequence=mean)
    elites: list[tuple[float, np.ndarray]] = []
    for _ in range(config.iterations):
        samples = rng.normal(mean[None], std[None],
                             size=(config.population, config.horizon, ACTION_DIM))
        samples = np.clip(samples, -bounds, bounds)
        scored = [(rollout(s), s) for s in samples]
        plan.episodes_used += config.population
        pool = elites + scored
        pool.sort(key=lambda e: -e[0])
        elites = pool[:n_elite]
        elite_seqs = np.array([s for _, s in elites])
        mean = elite_seqs.mean(axis=0)
        std = np.maximum(elite_seqs.std(axis=0), config.noise_floor)
        plan.elite_returns.append(float(np.mean([r for r, _ in elites])))
        plan.mean_std.append(float(std.mean()))
    plan.sequence = mean
    return plan
