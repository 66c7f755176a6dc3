"""Batch experiment runner, result tables, and paired statistics.

Episodes are embarrassingly parallel; per-episode seeds derive from
(master seed, model seed, case index) so results are independent of the
worker count, and failed episodes are captured as unsuccessful outcomes
with a diagnostic instead of aborting the batch.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy.special import stdtr

from .contacts import FrictionModel
from .env import EpisodeConfig, GraspRefineEnv, SensingFramework, run_episode
from .policies import CEMConfig, CEMPlan, GreedyMetricPolicy, Policy, RandomPolicy, ZeroPolicy, cem_plan
from .rewards import RewardFramework, RewardVariant
from .scene import SceneParams, EvalCase, build_test_dataset, dataset_subset


class ConfigError(ValueError):
    """Invalid experiment configuration."""


class InsufficientData(ValueError):
    """Paired test needs at least two paired samples."""


POLICY_NAMES = ("zero", "random", "greedy", "cem")


@dataclass(frozen=True)
class ExperimentConfig:
    rewards: tuple[str, ...] = ("epsilon_and_delta",)
    sensings: tuple[str, ...] = ("full",)
    policy: str = "zero"
    policy_params: tuple[tuple[str, float], ...] = ()
    dataset_seed: int = 0
    master_seed: int = 0
    model_seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    subset: int | None = None  # number of test cases; None = full 240
    mu: float = 0.5
    edge_count: int = 8
    stiffness: float = 1000.0
    hold_eps_min: float = 0.01
    workers: int = 1

    def __post_init__(self):
        for name in self.rewards:
            try:
                RewardVariant(name)
            except ValueError:
                raise ConfigError(f"unknown reward framework {name!r}") from None
        for name in self.sensings:
            try:
                SensingFramework(name)
            except ValueError:
                raise ConfigError(f"unknown sensing framework {name!r}") from None
        if self.policy not in POLICY_NAMES:
            raise ConfigError(f"unknown policy {self.policy!r}; expected one of {POLICY_NAMES}")
        if len(self.model_seeds) < 1:
            raise ConfigError("need at least one model seed")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        data = dict(data)
        for key in ("rewards", "sensings", "model_seeds"):
            if key in data:
                data[key] = tuple(data[key])
        if "policy_params" in data and isinstance(data["policy_params"], dict):
            data["policy_params"] = tuple(sorted(data["policy_params"].items()))
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    def scene_params(self) -> SceneParams:
        return SceneParams(
            friction=FrictionModel(mu=self.mu, edge_count=self.edge_count),
            stiffness=self.stiffness,
        )

    def episode_config(self, reward_name: str, sensing_name: str) -> EpisodeConfig:
        return EpisodeConfig(
            reward=RewardFramework.for_friction(RewardVariant(reward_name), self.mu),
            sensing=SensingFramework(sensing_name),
            scene=self.scene_params(),
            hold_eps_min=self.hold_eps_min,
        )

    def cem_config(self, seed: int) -> CEMConfig:
        params = dict(self.policy_params)
        return CEMConfig(
            population=int(params.get("population", 20)),
            elite_frac=float(params.get("elite_frac", 0.25)),
            iterations=int(params.get("iterations", 5)),
            horizon=int(params.get("horizon", 27)),
            init_std_scale=float(params.get("init_std_scale", 0.5)),
            noise_floor=float(params.get("noise_floor", 0.0)),
            episode_budget=int(params.get("episode_budget", 10_000)),
            seed=seed,
        )


@dataclass(frozen=True)
class EpisodeOutcome:
    framework: str
    seed: int
    case_index: int
    shape: str
    case: str
    lift: bool
    hold: bool
    total_reward: float
    failed: bool = False
    error: str | None = None


@dataclass(frozen=True)
class ResultRow:
    framework: str
    seed: int
    shape: str
    case: str
    lift_rate: float
    hold_rate: float
    mean_reward: float
    episodes: int
    failures: int


@dataclass
class ResultsTable:
    rows: list[ResultRow] = field(default_factory=list)

    def frameworks(self) -> list[str]:
        seen: dict[str, None] = {}
        for r in self.rows:
            seen.setdefault(r.framework, None)
        return list(seen)

    def per_seed_hold(self, framework: str | None = None) -> dict[int, float]:
        """Episode-weighted overall hold-success rate per seed."""
        acc: dict[int, list[float]] = {}
        for r in self.rows:
            if framework is not None and r.framework != framework:
                continue
            num, den = acc.setdefault(r.seed, [0.0, 0.0])
            acc[r.seed][0] = num + r.hold_rate * r.episodes
            acc[r.seed][1] = den + r.episodes
        return {s: (n / d if d else 0.0) for s, (n, d) in sorted(acc.items())}

    def per_seed_lift(self, framework: str | None = None) -> dict[int, float]:
        acc: dict[int, list[float]] = {}
        for r in self.rows:
            if framework is not None and r.framework != framework:
                continue
            num, den = acc.setdefault(r.seed, [0.0, 0.0])
            acc[r.seed][0] = num + r.lift_rate * r.episodes
            acc[r.seed][1] = den + r.episodes
        return {s: (n / d if d else 0.0) for s, (n, d) in sorted(acc.items())}

    def aggregate_hold(self, framework: str | None = None) -> float:
        rates = list(self.per_seed_hold(framework).values())
        return float(np.mean(rates)) if rates else 0.0


# ---------------------------------------------------------------------------
# episode execution


def derive_seed(master_seed: int, model_seed: int, case_index: int) -> int:
    ss = np.random.SeedSequence([master_seed, model_seed, case_index])
    return int(ss.generate_state(1, np.uint64)[0] % (2**63))


@dataclass(frozen=True)
class _Job:
    framework: str
    reward: str
    sensing: str
    model_seed: int
    episode_seed: int
    case: EvalCase
    config: EpisodeConfig
    policy: str
    cem: CEMConfig | None


_WORKER_CACHE: dict = {}


def _make_policy(job: _Job, env: GraspRefineEnv) -> Policy:
    if job.policy == "zero":
        return ZeroPolicy()
    if job.policy == "random":
        return RandomPolicy(seed=job.episode_seed)
    if job.policy == "greedy":
        return GreedyMetricPolicy(env)
    plan: CEMPlan = cem_plan(
        lambda: GraspRefineEnv(job.config, reset_cache=_WORKER_CACHE),
        (job.case.object, job.case.error),
        job.cem,
        limits=job.config.limits,
    )
    return plan.policy()


def _run_job(job: _Job) -> EpisodeOutcome:
    try:
        env = GraspRefineEnv(job.config, reset_cache=_WORKER_CACHE)
        policy = _make_policy(job, env)
        result = run_episode(env, policy, (job.case.object, job.case.error))
        return EpisodeOutcome(
            framework=job.framework,
            seed=job.model_seed,
            case_index=job.case.index,
            shape=job.case.object.shape.value,
            case=job.case.label,
            lift=result.lift_success,
            hold=result.hold_success,
            total_reward=result.total_reward,
        )
    except Exception as exc:  # captured, not fatal: one bad episode must not kill a batch
        return EpisodeOutcome(
            framework=job.framework,
            seed=job.model_seed,
            case_index=job.case.index,
            shape=job.case.object.shape.value,
            case=job.case.label,
            lift=False,
            hold=False,
            total_reward=0.0,
            failed=True,
            error=f"{type(exc).__name__}: {exc}",
        )


def run_experiment(cfg: ExperimentConfig) -> ResultsTable:
    """Run every (framework, seed) over the test dataset and aggregate."""
    cases = dataset_subset(build_test_dataset(cfg.dataset_seed), cfg.subset)
    jobs: list[_Job] = []
    for reward in cfg.rewards:
        for sensing in cfg.sensings:
            framework = f"{reward}/{sensing}"
            config = cfg.episode_config(reward, sensing)
            for model_seed in cfg.model_seeds:
                for case in cases:
                    episode_seed = derive_seed(cfg.master_seed, model_seed, case.index)
                    jobs.append(
                        _Job(
                            framework=framework,
                            reward=reward,
                            sensing=sensing,
                            model_seed=model_seed,
                            episode_seed=episode_seed,
                            case=case,
                            config=config,
                            policy=cfg.policy,
                            cem=cfg.cem_config(episode_seed) if cfg.policy == "cem" else None,
                        )
                    )
    if cfg.workers <= 1:
        outcomes = [_run_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            outcomes = list(pool.map(_run_job, jobs, chunksize=1))
    return aggregate_outcomes(outcomes)


def aggregate_outcomes(outcomes: list[EpisodeOutcome]) -> ResultsTable:
    """Fold per-episode outcomes into per-cell rates, in outcome order."""
    cells: dict[tuple[str, int, str, str], list[EpisodeOutcome]] = {}
    for o in sorted(outcomes, key=lambda o: (o.framework, o.seed, o.case_index)):
        cells.setdefault((o.framework, o.seed, o.shape, o.case), []).append(o)
    rows = []
    for (framework, seed, shape, case), group in cells.items():
        n = len(group)
        rows.append(
            ResultRow(
                framework=framework,
                seed=seed,
                shape=shape,
                case=case,
                lift_rate=sum(o.lift for o in group) / n,
                hold_rate=sum(o.hold for o in group) / n,
                mean_reward=sum(o.total_reward for o in group) / n,
                episodes=n,
                failures=sum(o.failed for o in group),
            )
        )
    return ResultsTable(rows=rows)


# ---------------------------------------------------------------------------
# statistics


class TTestResult(NamedTuple):
    p_value: float
    t_stat: float
    dof: int
    degenerate: bool


def paired_one_sided_t_test(a, b) -> TTestResult:
    """One-sided paired t-test of mean(a) > mean(b).

    The statistic is mean(d) / (sd(d) / sqrt(n)) on the paired differences
    with n - 1 degrees of freedom. When every difference is identical the
    variance degenerates and the p-value is 0.5 / 0 / 1 by the sign of the
    common difference, flagged in the result.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("inputs must be 1-d arrays of equal length")
    n = len(a)
    if n < 2:
        raise InsufficientData("need at least two paired samples")
    d = a - b
    dof = n - 1
    if np.ptp(d) == 0.0:
        if d[0] == 0.0:
            return TTestResult(p_value=0.5, t_stat=0.0, dof=dof, degenerate=True)
        return TTestResult(p_value=0.0 if d[0] > 0 else 1.0,
                           t_stat=np.inf if d[0] > 0 else -np.inf,
                           dof=dof, degenerate=True)
    sd = float(np.std(d, ddof=1))
    t = float(np.mean(d) / (sd / np.sqrt(n)))
    p = float(stdtr(dof, -t))  # P(T_{n-1} >= t)
    return TTestResult(p_value=p, t_stat=t, dof=dof, degenerate=False)


def compare_tables(a: ResultsTable, b: ResultsTable,
                   framework_a: str | None = None,
                   framework_b: str | None = None) -> TTestResult:
    """Paired test on per-seed overall hold rates of two result tables."""
    ra = a.per_seed_hold(framework_a)
    rb = b.per_seed_hold(framework_b)
    seeds = sorted(set(ra) & set(rb))
    if len(seeds) != len(ra) or len(seeds) != len(rb):
        raise ValueError("result tables must cover the same model seeds")
    return paired_one_sided_t_test([ra[s] for s in seeds], [rb[s] for s in seeds])


# ---------------------------------------------------------------------------
# result files


RESULT_COLUMNS = ("framework", "seed", "shape", "case", "lift_rate", "hold_rate",
                  "mean_reward", "episodes", "failures")


def export_results(table: ResultsTable, out_dir, formats: tuple[str, ...] = ("csv", "json")) -> list[Path]:
    """Write the table as CSV and/or JSON with a stable column order."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if "csv" in formats:
        path = out_dir / "results.csv"
        try:
            with path.open("w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(RESULT_COLUMNS)
                for r in table.rows:
                    writer.writerow([r.framework, r.seed, r.shape, r.case,
                                     repr(r.lift_rate), repr(r.hold_rate),
                                     repr(r.mean_reward), r.episodes, r.failures])
        except OSError as exc:
            raise OSError(f"writing {path}: {exc}") from exc
        written.append(path)
    if "json" in formats:
        path = out_dir / "results.json"
        try:
            path.write_text(json.dumps({"rows": [asdict(r) for r in table.rows]}, indent=2))
        except OSError as exc:
            raise OSError(f"writing {path}: {exc}") from exc
        written.append(path)
    return written


def load_results(path) -> ResultsTable:
    path = Path(path)
    if path.suffix == ".json":
        data = json.loads(path.read_text())
        return ResultsTable(rows=[ResultRow(**row) for row in data["rows"]])
    rows = []
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != RESULT_COLUMNS:
            raise ValueError(f"{path}: unexpected result columns {reader.fieldnames}")
        for rec in reader:
            rows.append(
                ResultRow(
                    framework=rec["framework"],
                    seed=int(rec["seed"]),
                    shape=rec["shape"],
                    case=rec["case"],
                    lift_rate=float(rec["lift_rate"]),
                    hold_rate=float(rec["hold_rate"]),
                    mean_reward=float(rec["mean_reward"]),
                    episodes=int(rec["episodes"]),
                    failures=int(rec["failures"]),
                )
            )
    return ResultsTable(rows=rows)
