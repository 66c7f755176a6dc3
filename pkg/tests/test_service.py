import numpy as np
import pytest
from fastapi.testclient import TestClient

from graspstab import __version__
from graspstab.harness import paired_one_sided_t_test
from graspstab.metrics import delta_cur, epsilon_force, epsilon_torque
from graspstab.service.app import create_app

from conftest import antipodal_grasp


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


ANTIPODAL = {
    "contacts": [
        {"position": [0.04, 0.0, 0.0], "normal": [-1.0, 0.0, 0.0], "force": [-2.0, 0.0, 0.0]},
        {"position": [-0.04, 0.0, 0.0], "normal": [1.0, 0.0, 0.0], "force": [2.0, 0.0, 0.0]},
    ],
    "com": [0.0, 0.0, 0.0],
    "mu": 1.0,
    "edges": 8,
}


class TestHealth:
    def test_health(self, client):
        resp = client.get("/health")
        assert resp.status_code == 200
        assert resp.json() == {"status": "ok", "version": __version__}


class TestMetricsEndpoint:
    def test_matches_library(self, client):
        resp = client.post("/metrics", json=ANTIPODAL)
        assert resp.status_code == 200
        body = resp.json()
        g = antipodal_grasp(mu=1.0, edge_count=8, radius=0.04, preload=2.0)
        assert body["epsilon_force"] == pytest.approx(epsilon_force(g), rel=1e-12)
        assert body["epsilon_torque"] == pytest.approx(epsilon_torque(g), rel=1e-12)
        assert body["delta_cur"] == pytest.approx(delta_cur(g), rel=1e-12)
        assert body["delta_task"] is None
        assert body["force_closure"] is True
        assert body["contact_count"] == 2

    def test_with_tasks(self, client):
        payload = dict(ANTIPODAL, tasks=[[0.0, 0.0, 0.981, 0.0, 0.0, 0.0]])
        body = client.post("/metrics", json=payload).json()
        assert body["delta_task"] is not None
        assert body["delta_task"] <= body["delta_cur"] + 1e-12

    def test_empty_grasp(self, client):
        body = client.post("/metrics", json={"contacts": []}).json()
        assert body["epsilon_force"] == 0.0
        assert body["force_closure"] is False

    def test_invalid_normal_rejected(self, client):
        bad = {"contacts": [{"position": [0, 0, 0], "normal": [0, 0, 2.0]}]}
        assert client.post("/metrics", json=bad).status_code == 422


class TestDatasetEndpoint:
    def test_dataset_shape(self, client):
        body = client.post("/dataset", json={"seed": 0}).json()
        assert len(body["cases"]) == 240
        labels = [c["label"] for c in body["cases"][:8]]
        assert labels == list("ABCDEFGH")

    def test_deterministic(self, client):
        a = client.post("/dataset", json={"seed": 9}).json()
        b = client.post("/dataset", json={"seed": 9}).json()
        assert a == b


class TestEpisodeEndpoint:
    def test_zero_policy_episode(self, client):
        req = {"policy": "zero", "dataset_seed": 0, "case_index": 0, "include_trace": True}
        body = client.post("/episode", json=req).json()
        assert body["steps"] <= 27
        assert body["termination"] in {"completed", "object_shifted", "joint_limit",
                                       "dropped_at_lift"}
        assert len(body["trace"]) == body["steps"]
        assert body["case"]["label"] == "A"

    def test_sampled_case_deterministic(self, client):
        req = {"policy": "random", "seed": 3}
        a = client.post("/episode", json=req).json()
        b = client.post("/episode", json=req).json()
        assert a == b

    def test_unknown_policy(self, client):
        assert client.post("/episode", json={"policy": "cem"}).status_code == 422

    def test_unknown_reward(self, client):
        assert client.post("/episode", json={"reward": "nope"}).status_code == 422

    def test_case_index_out_of_range(self, client):
        req = {"policy": "zero", "dataset_seed": 0, "case_index": 240}
        assert client.post("/episode", json=req).status_code == 422


class TestExperimentsEndpoint:
    def test_small_run(self, client):
        req = {"rewards": ["epsilon_and_delta"], "policy": "zero",
               "model_seeds": [0, 1], "subset": 4, "workers": 1}
        body = client.post("/experiments", json=req).json()
        assert sum(r["episodes"] for r in body["rows"]) == 8
        assert all(r["framework"] == "epsilon_and_delta/full" for r in body["rows"])

    def test_invalid_framework(self, client):
        req = {"rewards": ["bogus"]}
        assert client.post("/experiments", json=req).status_code == 422


class TestCompareEndpoint:
    def test_matches_library(self, client):
        a = [0.9, 0.8, 0.85]
        b = [0.7, 0.6, 0.75]
        body = client.post("/compare", json={"a": a, "b": b}).json()
        res = paired_one_sided_t_test(np.array(a), np.array(b))
        assert body["p_value"] == pytest.approx(res.p_value, rel=1e-12)
        assert body["dof"] == 2
        assert body["degenerate"] is False

    def test_equal_inputs(self, client):
        body = client.post("/compare", json={"a": [0.5, 0.5], "b": [0.5, 0.5]}).json()
        assert body["p_value"] == 0.5
        assert body["degenerate"] is True

    def test_degenerate_t_stat_serialized_as_null(self, client):
        body = client.post("/compare", json={"a": [0.75, 0.5], "b": [0.5, 0.25]}).json()
        assert body["degenerate"] is True
        assert body["t_stat"] is None

    def test_insufficient_data(self, client):
        assert client.post("/compare", json={"a": [0.5], "b": [0.4]}).status_code == 422
