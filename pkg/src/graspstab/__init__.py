"""Analytic grasp stability metrics and a quasi-static grasp refinement lab."""

__version__ = "0.1.0"

from .contacts import Contact, FrictionModel, cone_edges, decompose_force, tangential_margin
from .geometry import DegenerateInput, Hull3, convex_hull_3d, min_boundary_distance, tangent_basis
from .metrics import (
    GraspSnapshot,
    delta_cur,
    delta_task,
    distribute_wrench,
    epsilon_force,
    epsilon_torque,
    grasp_matrix,
)
from .rewards import RewardFramework, RewardVariant, step_reward, terminal_reward
from .env import EpisodeConfig, GraspRefineEnv, SensingFramework, run_episode
from .scene import ActionLimits, SceneParams, build_test_dataset, sample_training_case

__all__ = [
    "__version__",
    "Contact",
    "FrictionModel",
    "cone_edges",
    "decompose_force",
    "tangential_margin",
    "DegenerateInput",
    "Hull3",
    "convex_hull_3d",
    "min_boundary_distance",
    "tangent_basis",
    "GraspSnapshot",
    "delta_cur",
    "delta_task",
    "distribute_wrench",
    "epsilon_force",
    "epsilon_torque",
    "grasp_matrix",
    "RewardFramework",
    "RewardVariant",
    "step_reward",
    "terminal_reward",
    "EpisodeConfig",
    "GraspRefineEnv",
    "SensingFramework",
    "run_episode",
    "ActionLimits",
    "SceneParams",
    "build_test_dataset",
    "sample_training_case",
]
