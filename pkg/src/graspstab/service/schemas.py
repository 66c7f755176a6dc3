"""Pydantic request/response models for the grasp stability service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class ContactIn(BaseModel):
    position: list[float] = Field(min_length=3, max_length=3)
    normal: list[float] = Field(min_length=3, max_length=3)
    force: list[float] = Field(default=[0.0, 0.0, 0.0], min_length=3, max_length=3)


class GraspIn(BaseModel):
    contacts: list[ContactIn] = []
    com: list[float] = Field(default=[0.0, 0.0, 0.0], min_length=3, max_length=3)
    mu: float = 0.5
    edges: int = 8
    tasks: list[list[float]] | None = None


class MetricsOut(BaseModel):
    epsilon_force: float
    epsilon_torque: float
    delta_cur: float
    delta_task: float | None
    force_closure: bool
    contact_count: int


class ObjectIn(BaseModel):
    shape: str
    dimensions: list[float]
    mass: float


class WristErrorIn(BaseModel):
    translation: list[float] = Field(min_length=3, max_length=3)
    rotation: list[float] = Field(min_length=3, max_length=3)


class CaseOut(BaseModel):
    index: int
    label: str
    object: ObjectIn
    error: WristErrorIn


class DatasetRequest(BaseModel):
    seed: int = 0


class DatasetOut(BaseModel):
    seed: int
    cases: list[CaseOut]


class EpisodeRequest(BaseModel):
    reward: str = "epsilon_and_delta"
    sensing: str = "full"
    policy: str = "zero"
    seed: int = 0
    mu: float = 0.5
    edge_count: int = 8
    stiffness: float = 1000.0
    dataset_seed: int | None = None  # with case_index: pick from the test dataset
    case_index: int | None = None
    include_trace: bool = False


class StepOut(BaseModel):
    step: int
    stage: str
    action: list[float]
    state_hash: str
    reward: float


class EpisodeOut(BaseModel):
    lift_success: bool
    hold_success: bool
    termination: str
    steps: int
    total_reward: float
    case: CaseOut
    trace: list[StepOut] | None = None


class ExperimentRequest(BaseModel):
    rewards: list[str] = ["epsilon_and_delta"]
    sensings: list[str] = ["full"]
    policy: str = "zero"
    policy_params: dict[str, float] = {}
    dataset_seed: int = 0
    master_seed: int = 0
    model_seeds: list[int] = [0, 1, 2, 3, 4]
    subset: int | None = None
    mu: float = 0.5
    edge_count: int = 8
    stiffness: float = 1000.0
    hold_eps_min: float = 0.01
    workers: int = 1


class ResultRowOut(BaseModel):
    framework: str
    seed: int
    shape: str
    case: str
    lift_rate: float
    hold_rate: float
    mean_reward: float
    episodes: int
    failures: int


class ResultsOut(BaseModel):
    rows: list[ResultRowOut]


class CompareRequest(BaseModel):
    a: list[float]
    b: list[float]


class CompareOut(BaseModel):
    p_value: float
    t_stat: float | None  # None when the variance degenerates (infinite statistic)
    dof: int
    degenerate: bool


class HealthOut(BaseModel):
    status: str
    version: str
