"""Acceptance suite: one test per criterion, one printed PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines live. The
two experiment-scale criteria use 4 worker processes and dominate runtime.
"""

import sys
import time

import numpy as np
import pytest

from graspstab.contacts import Contact, FrictionModel, cone_edge_array
from graspstab.env import EpisodeConfig, GraspRefineEnv, SensingFramework, Termination, run_episode
from graspstab.harness import ExperimentConfig, paired_one_sided_t_test, run_experiment
from graspstab.metrics import (
    GraspSnapshot,
    delta_cur,
    delta_task,
    distribute_wrench,
    epsilon_force,
    epsilon_torque,
    grasp_matrix,
)
from graspstab.objects import ObjectShape, ObjectSpec
from graspstab.policies import RandomPolicy
from graspstab.scene import WristError, build_test_dataset
from graspstab.serialize import state_hash

from conftest import random_grasp, random_unit
from oracles import brute_force_min_ball_vectorized, t_sf_quadrature

WORKERS = 4


def report(name: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} {name}: {detail}"
    print(line, file=sys.__stdout__, flush=True)
    assert ok, line


def rel_close(a: float, b: float, rel: float, abs_tol: float = 1e-12) -> bool:
    return abs(a - b) <= max(abs_tol, rel * max(abs(a), abs(b)))


def test_criterion_metric_oracle_equivalence():
    rng = np.random.default_rng(101)
    t0 = time.time()
    worst = 0.0
    for _ in range(200):
        g = random_grasp(rng, n_contacts=int(rng.integers(2, 6)))
        force_cloud = np.vstack([cone_edge_array(c, g.friction) for c in g.contacts])
        torque_cloud = np.vstack(
            [np.cross(c.position - g.com, cone_edge_array(c, g.friction)) for c in g.contacts]
        )
        for value, cloud in ((epsilon_force(g), force_cloud), (epsilon_torque(g), torque_cloud)):
            oracle = brute_force_min_ball_vectorized(cloud)
            assert rel_close(value, oracle, rel=1e-8), (value, oracle)
            if max(abs(value), abs(oracle)) > 0:
                worst = max(worst, abs(value - oracle) / max(abs(value), abs(oracle)))
    elapsed = time.time() - t0
    report(
        "metric-oracle-equivalence",
        elapsed < 60.0,
        f"200 grasps, worst relative deviation {worst:.2e}, {elapsed:.1f}s (< 60s)",
    )


def test_criterion_force_closure_sanity():
    rng = np.random.default_rng(102)
    singles_zero = 0
    for _ in range(100):
        g = random_grasp(rng, n_contacts=1)
        singles_zero += epsilon_force(g) == 0.0
    antipodal_positive = 0
    for _ in range(100):
        mu = float(rng.uniform(0.3, 1.0))
        d = random_unit(rng)
        r = float(rng.uniform(0.02, 0.1))
        contacts = [
            Contact(position=r * d, normal=-d, force=-2.0 * d),
            Contact(position=-r * d, normal=d, force=2.0 * d),
        ]
        g = GraspSnapshot(contacts=contacts, com=np.zeros(3),
                          friction=FrictionModel(mu=mu, edge_count=8))
        antipodal_positive += epsilon_force(g) > 0.0
    report(
        "force-closure-sanity",
        singles_zero == 100 and antipodal_positive == 100,
        f"single-contact zero {singles_zero}/100, antipodal positive {antipodal_positive}/100",
    )


def test_criterion_cone_refinement_monotonicity():
    rng = np.random.default_rng(103)
    ok = True
    for _ in range(50):
        g = random_grasp(rng, edge_count=4)
        values = {}
        for m in (4, 8, 16):
            refined = GraspSnapshot(contacts=g.contacts, com=g.com,
                                    friction=FrictionModel(mu=g.friction.mu, edge_count=m))
            values[m] = epsilon_force(refined)
            for c in g.contacts:
                coarse = cone_edge_array(c, FrictionModel(mu=g.friction.mu, edge_count=m))
                fine = cone_edge_array(c, FrictionModel(mu=g.friction.mu, edge_count=2 * m))
                if np.abs(coarse - fine[::2]).max() > 1e-12:
                    ok = False
        if not (values[16] >= values[8] - 1e-12 and values[8] >= values[4] - 1e-12):
            ok = False
    report("cone-refinement-monotonicity", ok,
           "eps_f(16) >= eps_f(8) >= eps_f(4) with nested edge sets on 50 grasps")


def test_criterion_delta_analytics():
    fm = FrictionModel(mu=0.5, edge_count=8)
    normal_load = GraspSnapshot(
        contacts=[Contact(position=np.zeros(3), normal=[0.0, 0.0, 1.0], force=[0.0, 0.0, 2.0])],
        com=np.zeros(3), friction=fm)
    exact_normal = delta_cur(normal_load) == 0.5 * 2.0

    boundary = GraspSnapshot(
        contacts=[Contact(position=np.zeros(3), normal=[0.0, 0.0, 1.0], force=[1.0, 0.0, 2.0])],
        com=np.zeros(3), friction=fm)
    exact_boundary = delta_cur(boundary) == 0.0

    rng = np.random.default_rng(104)
    zero_task = np.zeros((1, 6))
    agree = all(
        abs(delta_task(g, zero_task) - delta_cur(g)) <= 1e-12
        for g in (random_grasp(rng) for _ in range(100))
    )
    report(
        "delta-analytics",
        exact_normal and exact_boundary and agree,
        f"normal load mu*f_n exact: {exact_normal}, boundary zero exact: {exact_boundary}, "
        f"delta_task(T=0)==delta_cur on 100 grasps: {agree}",
    )


def test_criterion_wrench_distribution():
    rng = np.random.default_rng(105)
    checked = 0
    ok = True
    while checked < 100:
        g = random_grasp(rng, n_contacts=int(rng.integers(3, 6)))
        G = grasp_matrix(g)
        if np.linalg.matrix_rank(G) < 6:
            continue
        checked += 1
        w = rng.normal(size=6)
        f0 = distribute_wrench(G, w).forces.reshape(-1)
        if np.linalg.norm(G @ f0 - w) > 1e-8 * max(1.0, np.linalg.norm(w)):
            ok = False
        _, _, vt = np.linalg.svd(G)
        null_basis = vt[6:]
        for _ in range(50):
            alt = f0 + null_basis.T @ rng.normal(size=null_basis.shape[0])
            if np.linalg.norm(f0) > np.linalg.norm(alt) + 1e-12:
                ok = False
    report("wrench-distribution", ok,
           "100 full-rank grasps: residual <= 1e-8*max(1,|w|), minimum norm vs 50 alternatives")


def test_criterion_environment_contracts():
    cuboid = ObjectSpec(shape=ObjectShape.CUBOID, dimensions=(0.06, 0.06, 0.08), mass=0.2)
    no_error = WristError(np.zeros(3), np.zeros(3))
    details = []

    dims_ok = True
    for sensing, dim in ((SensingFramework.FULL, 70), (SensingFramework.NORMAL, 56),
                         (SensingFramework.BINARY, 56), (SensingFramework.NONE, 7)):
        env = GraspRefineEnv(EpisodeConfig(sensing=sensing))
        if env.reset((cuboid, no_error)).shape != (dim,):
            dims_ok = False
    details.append(f"state dims 70/56/56/7: {dims_ok}")

    lengths_ok = True
    for seed in range(5):
        env = GraspRefineEnv(EpisodeConfig())
        err = WristError(np.random.default_rng(seed).uniform(-0.03, 0.03, 3), np.zeros(3))
        if run_episode(env, RandomPolicy(seed=seed), (cuboid, err)).step_count > 27:
            lengths_ok = False
    details.append(f"episode length <= 27: {lengths_ok}")

    env = GraspRefineEnv(EpisodeConfig())
    env.reset((cuboid, no_error))
    done, info = False, {}
    while not done:
        _, _, done, info = env.step(np.array([0, 0, 0, 0.01, 0, 0, 0, 0, 0]))
    shift_ok = (info["termination"] == Termination.OBJECT_SHIFTED.value
                and info["object_shift"] > 0.10)
    details.append(f"shift>10cm fires: {shift_ok}")

    env = GraspRefineEnv(EpisodeConfig())
    env.reset((cuboid, WristError(np.array([0.5, 0.5, 0.3]), np.zeros(3))))
    _, _, done, info = env.step(np.array([0.1, 0, 0, 0, 0, 0, 0, 0, 0]))
    joint_ok = done and info["termination"] == Termination.JOINT_LIMIT.value
    details.append(f"joint>3rad fires: {joint_ok}")

    def trace(seed):
        env = GraspRefineEnv(EpisodeConfig())
        result = run_episode(env, RandomPolicy(seed=seed),
                             (cuboid, WristError(np.array([0.01, -0.02, 0.0]), np.zeros(3))))
        return [(state_hash(r.state), r.reward) for r in result.records]

    replay_ok = trace(7) == trace(7)
    details.append(f"bitwise replay: {replay_ok}")

    report("environment-contracts",
           dims_ok and lengths_ok and shift_ok and joint_ok and replay_ok,
           "; ".join(details))


def test_criterion_test_dataset():
    cases = build_test_dataset(0)
    size_ok = len(cases) == 240
    norms_ok = True
    translation_cm = {"A": 0, "B": 1, "C": 2, "D": 3, "E": 4, "F": 5, "G": 6, "H": 7}
    rotation_deg = {"A": 0, "B": 2, "C": 4, "D": 6, "E": 8, "F": 10, "G": 12, "H": 14}
    for c in cases:
        if abs(np.linalg.norm(c.error.translation) - translation_cm[c.label] / 100.0) > 1e-12:
            norms_ok = False
        if abs(np.linalg.norm(c.error.rotation) - np.radians(rotation_deg[c.label])) > 1e-12:
            norms_ok = False
    report("test-dataset", size_ok and norms_ok,
           f"240 cases: {size_ok}, error norms exact to 1e-12: {norms_ok}")


def test_criterion_statistics():
    equal = paired_one_sided_t_test([0.5, 0.6, 0.7], [0.5, 0.6, 0.7])
    half_ok = equal.p_value == 0.5

    a = np.array([0.9, 0.8, 0.85])
    b = np.array([0.7, 0.6, 0.75])
    res = paired_one_sided_t_test(a, b)
    oracle = t_sf_quadrature(res.t_stat, res.dof)
    fixed_ok = abs(res.p_value - oracle) <= 1e-10

    rng = np.random.default_rng(108)
    sweep_ok = True
    for _ in range(10):
        n = int(rng.integers(3, 10))
        x, y = rng.uniform(0, 1, n), rng.uniform(0, 1, n)
        r = paired_one_sided_t_test(x, y)
        if abs(r.p_value - t_sf_quadrature(r.t_stat, r.dof)) > 1e-10:
            sweep_ok = False
    report("statistics", half_ok and fixed_ok and sweep_ok,
           f"a=b gives 0.5: {half_ok}; |p - quadrature oracle| <= 1e-10 "
           f"(fixed vectors: {fixed_ok}, sweep: {sweep_ok})")


def test_criterion_reward_framework_directional():
    cfg = ExperimentConfig(
        rewards=("epsilon_and_delta", "binary"),
        sensings=("full",),
        policy="cem",
        policy_params=(("population", 20), ("iterations", 5), ("elite_frac", 0.25)),
        dataset_seed=0,
        model_seeds=(0, 1, 2, 3, 4),
        subset=60,
        workers=WORKERS,
    )
    t0 = time.time()
    table = run_experiment(cfg)
    elapsed = time.time() - t0
    a = list(table.per_seed_hold("epsilon_and_delta/full").values())
    b = list(table.per_seed_hold("binary/full").values())
    res = paired_one_sided_t_test(a, b)
    mean_a, mean_b = float(np.mean(a)), float(np.mean(b))
    ok = mean_a >= mean_b and res.p_value < 0.1 and elapsed < 7200.0
    report(
        "reward-framework-directional",
        ok,
        f"CEM hold-success eps&delta {mean_a:.3f} vs binary {mean_b:.3f}, "
        f"paired one-sided p = {res.p_value:.2e} (< 0.1), {elapsed / 60:.1f} min (< 120 min)",
    )


def test_criterion_sensing_directional():
    cfg = ExperimentConfig(
        rewards=("epsilon_and_delta",),
        sensings=("full", "normal", "none"),
        policy="greedy",
        dataset_seed=0,
        model_seeds=(0, 1, 2, 3, 4),
        subset=60,
        workers=WORKERS,
    )
    t0 = time.time()
    table = run_experiment(cfg)
    elapsed = time.time() - t0
    full = float(np.mean(list(table.per_seed_hold("epsilon_and_delta/full").values())))
    normal = float(np.mean(list(table.per_seed_hold("epsilon_and_delta/normal").values())))
    none = float(np.mean(list(table.per_seed_hold("epsilon_and_delta/none").values())))
    ok = full >= none and normal >= none
    report(
        "sensing-directional",
        ok,
        f"greedy hold-success full {full:.3f} / normal {normal:.3f} / none {none:.3f}; "
        f"margins over none: full +{full - none:.3f}, normal +{normal - none:.3f}; "
        f"{elapsed / 60:.1f} min",
    )
