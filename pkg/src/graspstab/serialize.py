"""File formats: grasp descriptions, experiment configs, datasets, traces.

Grasp descriptions and experiment configs are YAML (key-value with nested
lists); episode traces are line-delimited JSON with a header record followed
by one record per step carrying a state hash for golden-file replay.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np
import yaml

from .contacts import Contact, FrictionModel
from .env import EpisodeConfig, EpisodeResult, SensingFramework
from .harness import ConfigError, ExperimentConfig
from .metrics import GraspSnapshot
from .objects import ObjectShape, ObjectSpec
from .rewards import RewardFramework, RewardVariant
from .scene import SceneParams, EvalCase, WristError


def _vec(values, n: int, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.shape != (n,):
        raise ValueError(f"{name} must have {n} components")
    return arr


# ---------------------------------------------------------------------------
# grasp description files


def load_grasp_file(path) -> tuple[GraspSnapshot, np.ndarray | None]:
    """Read a grasp description; returns the snapshot and optional task set."""
    with Path(path).open() as fh:
        data = yaml.safe_load(fh)
    return grasp_from_dict(data)


def grasp_from_dict(data: dict) -> tuple[GraspSnapshot, np.ndarray | None]:
    if not isinstance(data, dict):
        raise ValueError("grasp description must be a mapping")
    fr = data.get("friction", {})
    friction = FrictionModel(mu=float(fr.get("mu", 0.5)), edge_count=int(fr.get("edges", 8)))
    contacts = []
    for i, c in enumerate(data.get("contacts", [])):
        contacts.append(
            Contact(
                position=_vec(c["position"], 3, f"contacts[{i}].position"),
                normal=_vec(c["normal"], 3, f"contacts[{i}].normal"),
                force=_vec(c.get("force", (0.0, 0.0, 0.0)), 3, f"contacts[{i}].force"),
            )
        )
    com = _vec(data.get("com", (0.0, 0.0, 0.0)), 3, "com")
    snapshot = GraspSnapshot(contacts=contacts, com=com, friction=friction)
    tasks = data.get("tasks")
    if tasks is not None:
        tasks = np.asarray(tasks, dtype=float).reshape(-1, 6)
    return snapshot, tasks


def grasp_to_dict(snapshot: GraspSnapshot, tasks: np.ndarray | None = None) -> dict:
    data = {
        "friction": {"mu": snapshot.friction.mu, "edges": snapshot.friction.edge_count},
        "com": [float(x) for x in snapshot.com],
        "contacts": [
            {
                "position": [float(x) for x in c.position],
                "normal": [float(x) for x in c.normal],
                "force": [float(x) for x in c.force],
            }
            for c in snapshot.contacts
        ],
    }
    if tasks is not None:
        data["tasks"] = [[float(x) for x in w] for w in np.atleast_2d(tasks)]
    return data


def save_grasp_file(path, snapshot: GraspSnapshot, tasks: np.ndarray | None = None) -> None:
    with Path(path).open("w") as fh:
        yaml.safe_dump(grasp_to_dict(snapshot, tasks), fh, sort_keys=False)


# ---------------------------------------------------------------------------
# experiment configuration files


def load_experiment_config(path) -> ExperimentConfig:
    try:
        with Path(path).open() as fh:
            data = yaml.safe_load(fh) or {}
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a mapping")
    return ExperimentConfig.from_dict(data)


def save_experiment_config(path, cfg: ExperimentConfig) -> None:
    data = {
        "rewards": list(cfg.rewards),
        "sensings": list(cfg.sensings),
        "policy": cfg.policy,
        "policy_params": dict(cfg.policy_params),
        "dataset_seed": cfg.dataset_seed,
        "master_seed": cfg.master_seed,
        "model_seeds": list(cfg.model_seeds),
        "subset": cfg.subset,
        "mu": cfg.mu,
        "edge_count": cfg.edge_count,
        "stiffness": cfg.stiffness,
        "hold_eps_min": cfg.hold_eps_min,
        "workers": cfg.workers,
    }
    with Path(path).open("w") as fh:
        yaml.safe_dump(data, fh, sort_keys=False)


# ---------------------------------------------------------------------------
# test cases


def case_to_dict(case: EvalCase) -> dict:
    return {
        "index": case.index,
        "label": case.label,
        "object": {
            "shape": case.object.shape.value,
            "dimensions": [float(x) for x in case.object.dimensions],
            "mass": case.object.mass,
        },
        "error": {
            "translation": [float(x) for x in case.error.translation],
            "rotation": [float(x) for x in case.error.rotation],
        },
    }


def case_from_dict(data: dict) -> EvalCase:
    obj = data["object"]
    err = data["error"]
    return EvalCase(
        index=int(data.get("index", 0)),
        label=str(data.get("label", "?")),
        object=ObjectSpec(
            shape=ObjectShape(obj["shape"]),
            dimensions=tuple(float(x) for x in obj["dimensions"]),
            mass=float(obj["mass"]),
        ),
        error=WristError(
            translation=_vec(err["translation"], 3, "error.translation"),
            rotation=_vec(err["rotation"], 3, "error.rotation"),
        ),
    )


def save_dataset(path, cases: list[EvalCase]) -> None:
    with Path(path).open("w") as fh:
        yaml.safe_dump({"cases": [case_to_dict(c) for c in cases]}, fh, sort_keys=False)


def load_dataset(path) -> list[EvalCase]:
    with Path(path).open() as fh:
        data = yaml.safe_load(fh)
    return [case_from_dict(c) for c in data["cases"]]


# ---------------------------------------------------------------------------
# episode traces


def state_hash(state: np.ndarray) -> str:
    return hashlib.sha256(np.asarray(state, dtype=np.float64).tobytes()).hexdigest()


def trace_header(case: EvalCase, config: EpisodeConfig, policy: str, seed: int) -> dict:
    return {
        "type": "header",
        "case": case_to_dict(case),
        "policy": policy,
        "seed": seed,
        "reward": config.reward.variant.value,
        "sensing": config.sensing.value,
        "mu": config.scene.friction.mu,
        "edge_count": config.scene.friction.edge_count,
        "stiffness": config.scene.stiffness,
        "hold_eps_min": config.hold_eps_min,
    }


def trace_step_records(result: EpisodeResult) -> list[dict]:
    return [
        {
            "step": rec.step,
            "stage": rec.stage.value,
            "action": [float(x) for x in rec.action],
            "state_hash": state_hash(rec.state),
            "reward": rec.reward,
        }
        for rec in result.records
    ]


def write_trace(path, case: EvalCase, config: EpisodeConfig, policy: str, seed: int,
                result: EpisodeResult) -> None:
    lines = [trace_header(case, config, policy, seed)]
    lines.extend(trace_step_records(result))
    lines.append(
        {
            "type": "outcome",
            "lift_success": result.lift_success,
            "hold_success": result.hold_success,
            "termination": result.termination.value,
            "total_reward": result.total_reward,
        }
    )
    with Path(path).open("w") as fh:
        for line in lines:
            fh.write(json.dumps(line) + "\n")


def read_trace(path) -> tuple[dict, list[dict], dict | None]:
    header = None
    steps = []
    outcome = None
    with Path(path).open() as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            if rec.get("type") == "header":
                header = rec
            elif rec.get("type") == "outcome":
                outcome = rec
            else:
                steps.append(rec)
    if header is None:
        raise ValueError(f"{path}: trace has no header record")
    return header, steps, outcome


def episode_config_from_header(header: dict) -> EpisodeConfig:
    return EpisodeConfig(
        reward=RewardFramework.for_friction(
            RewardVariant(header["reward"]), float(header["mu"])
        ),
        sensing=SensingFramework(header["sensing"]),
        scene=SceneParams(
            friction=FrictionModel(mu=float(header["mu"]), edge_count=int(header["edge_count"])),
            stiffness=float(header["stiffness"]),
        ),
        hold_eps_min=float(header.get("hold_eps_min", 0.01)),
    )
