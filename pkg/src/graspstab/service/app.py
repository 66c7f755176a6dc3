"""FastAPI service wrapping the grasp stability package.

Endpoints mirror the CLI subcommands: metric evaluation on a grasp
description, single-episode runs, test dataset generation, batch experiment
evaluation, and paired comparison of per-seed success rates.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__
from ..env import EpisodeConfig, GraspRefineEnv, SensingFramework, run_episode
from ..harness import (
    ConfigError,
    ExperimentConfig,
    InsufficientData,
    paired_one_sided_t_test,
    run_experiment,
)
from ..metrics import delta_cur, delta_task, epsilon_force, epsilon_torque
from ..contacts import FrictionModel
from ..policies import GreedyMetricPolicy, RandomPolicy, ZeroPolicy
from ..rewards import RewardFramework, RewardVariant
from ..scene import SceneParams, EvalCase, build_test_dataset, sample_training_case
from ..serialize import case_to_dict, grasp_from_dict, trace_step_records
from . import schemas


def _case_out(case: EvalCase) -> schemas.CaseOut:
    return schemas.CaseOut(**{k: v for k, v in case_to_dict(case).items()})


def create_app() -> FastAPI:
    app = FastAPI(title="graspstab", version=__version__)

    @app.get("/health", response_model=schemas.HealthOut)
    def health():
        return schemas.HealthOut(status="ok", version=__version__)

    @app.post("/metrics", response_model=schemas.MetricsOut)
    def metrics(req: schemas.GraspIn):
        try:
            snapshot, tasks = grasp_from_dict(
                {
                    "friction": {"mu": req.mu, "edges": req.edges},
                    "com": req.com,
                    "contacts": [c.model_dump() for c in req.contacts],
                    "tasks": req.tasks,
                }
            )
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        eps_f = epsilon_force(snapshot)
        return schemas.MetricsOut(
            epsilon_force=eps_f,
            epsilon_torque=epsilon_torque(snapshot),
            delta_cur=delta_cur(snapshot),
            delta_task=delta_task(snapshot, tasks) if tasks is not None else None,
            force_closure=eps_f > 0.0,
            contact_count=snapshot.contact_count,
        )

    @app.post("/dataset", response_model=schemas.DatasetOut)
    def dataset(req: schemas.DatasetRequest):
        cases = build_test_dataset(req.seed)
        return schemas.DatasetOut(seed=req.seed, cases=[_case_out(c) for c in cases])

    @app.post("/episode", response_model=schemas.EpisodeOut)
    def episode(req: schemas.EpisodeRequest):
        try:
            reward = RewardFramework.for_friction(RewardVariant(req.reward), req.mu)
            sensing = SensingFramework(req.sensing)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        config = EpisodeConfig(
            reward=reward,
            sensing=sensing,
            scene=SceneParams(
                friction=FrictionModel(mu=req.mu, edge_count=req.edge_count),
                stiffness=req.stiffness,
            ),
        )
        if req.case_index is not None:
            cases = build_test_dataset(req.dataset_seed or 0)
            if not 0 <= req.case_index < len(cases):
                raise HTTPException(status_code=422,
                                    detail=f"case_index out of range 0..{len(cases) - 1}")
            case = cases[req.case_index]
        else:
            spec, error = sample_training_case(req.seed)
            case = EvalCase(index=-1, label="sampled", object=spec, error=error)

        env = GraspRefineEnv(config)
        if req.policy == "zero":
            policy = ZeroPolicy()
        elif req.policy == "random":
            policy = RandomPolicy(seed=req.seed)
        elif req.policy == "greedy":
            policy = GreedyMetricPolicy(env)
        else:
            raise HTTPException(status_code=422,
                                detail=f"unknown policy {req.policy!r} (cem runs via /experiments)")
        try:
            result = run_episode(env, policy, (case.object, case.error))
        except Exception as exc:
            raise HTTPException(status_code=500, detail=f"{type(exc).__name__}: {exc}")
        trace = None
        if req.include_trace:
            trace = [schemas.StepOut(**rec) for rec in trace_step_records(result)]
        return schemas.EpisodeOut(
            lift_success=result.lift_success,
            hold_success=result.hold_success,
            termination=result.termination.value,
            steps=result.step_count,
            total_reward=result.total_reward,
            case=_case_out(case),
            trace=trace,
        )

    @app.post("/experiments", response_model=schemas.ResultsOut)
    def experiments(req: schemas.ExperimentRequest):
        try:
            cfg = ExperimentConfig.from_dict(req.model_dump())
        except ConfigError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        try:
            table = run_experiment(cfg)
        except Exception as exc:
            raise HTTPException(status_code=500, detail=f"{type(exc).__name__}: {exc}")
        return schemas.ResultsOut(
            rows=[schemas.ResultRowOut(**row.__dict__) for row in table.rows]
        )

    @app.post("/compare", response_model=schemas.CompareOut)
    def compare(req: schemas.CompareRequest):
        try:
            res = paired_one_sided_t_test(np.array(req.a), np.array(req.b))
        except (InsufficientData, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        t_stat = res.t_stat if np.isfinite(res.t_stat) else None
        return schemas.CompareOut(p_value=res.p_value, t_stat=t_stat,
                                  dof=res.dof, degenerate=res.degenerate)

    return app


app = create_app()
