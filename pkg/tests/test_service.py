import pathlib

import pytest
import yaml

from fastapi.testclient import TestClient

from tactile_sim import __version__
from tactile_sim.service.app import app

CONFIGS = pathlib.Path(__file__).resolve().parent.parent / "configs"

client = TestClient(app)


def topology_body(name):
    with open(CONFIGS / name) as f:
        return yaml.safe_load(f)["topology"]


def test_health():
    resp = client.get("/health")
    assert resp.status_code == 200
    assert resp.json() == {"status": "ok", "version": __version__}


def test_validate_valid():
    resp = client.post("/validate", json=topology_body("scenario1.yaml"))
    assert resp.status_code == 200
    body = resp.json()
    assert body["ok"] is True
    assert body["scenario"] == 1
    assert body["violations"] == []


def test_validate_invalid_reports_rule():
    resp = client.post("/validate",
                       json=topology_body("invalid/s-endpoint.yaml"))
    assert resp.status_code == 200
    body = resp.json()
    assert body["ok"] is False
    assert body["scenario"] is None
    assert [v["rule"] for v in body["violations"]] == ["s-endpoint"]
    assert body["violations"][0]["subjects"] == ["s-bad"]


def test_validate_structural_error_is_422():
    bad = {"scenario": 1,
           "entities": [{"id": "t", "kind": "tactile-device", "domain": "edge-a"}],
           "links": [{"id": "x", "kind": "T", "endpoints": ["t", "ghost"]}]}
    resp = client.post("/validate", json=bad)
    assert resp.status_code == 422


def test_classify():
    resp = client.post("/classify", json=topology_body("scenario2.yaml"))
    assert resp.status_code == 200
    assert resp.json()["scenario"] == 2
    no_gnc = {"scenario": 1, "entities": [
        {"id": "td", "kind": "tactile-device", "domain": "edge-a"}], "links": []}
    assert client.post("/classify", json=no_gnc).status_code == 422


def test_route_user_plane():
    resp = client.post("/route", json={
        "topology": topology_body("scenario1.yaml"),
        "source": "td-a1", "destination": "td-b1", "plane": "user"})
    assert resp.status_code == 200
    body = resp.json()
    assert [h["interface"] for h in body["hops"]] == ["T", "A", "A", "T"]
    assert [h["from_id"] for h in body["hops"]] == ["td-a1", "gnc-a", "bs", "gnc-b"]
    assert body["hops"][-1]["to_id"] == "td-b1"
    assert body["total_latency_s"] >= 0.0


def test_route_control_plane():
    resp = client.post("/route", json={
        "topology": topology_body("scenario2.yaml"),
        "source": "td-a", "plane": "control"})
    assert resp.status_code == 200
    assert [h["interface"] for h in resp.json()["hops"]] == ["A", "N1"]


def test_route_errors():
    base = {"topology": topology_body("scenario1.yaml"), "source": "td-a1"}
    assert client.post("/route", json={**base, "plane": "user"}).status_code == 422
    assert client.post("/route", json={**base, "plane": "astral"}).status_code == 422
    resp = client.post("/route", json={**base, "destination": "tsm", "plane": "user"})
    assert resp.status_code == 404  # service manager is not a device endpoint


def test_compliance_pass_and_fail():
    body = {"grade": "normal", "availability": 0.999999,
            "reliability": 0.99999, "latency_p99_s": 0.002,
            "e2e_budget_s": 0.005, "n_devices": 60}
    resp = client.post("/compliance", json=body)
    assert resp.status_code == 200
    out = resp.json()
    assert out["overall_pass"] is True
    assert {m["name"] for m in out["metrics"]} == {
        "availability", "reliability", "latency_p99", "scalability"}
    # exactly at the threshold fails: the comparison is strict
    body["availability"] = 0.99999
    out = client.post("/compliance", json=body).json()
    assert out["overall_pass"] is False
    failed = {m["name"]: m["passed"] for m in out["metrics"]}
    assert failed["availability"] is False


def test_compliance_unknown_grade():
    body = {"grade": "silver", "availability": 0.5, "reliability": 0.5,
            "latency_p99_s": 0.001, "e2e_budget_s": 0.005, "n_devices": 10}
    assert client.post("/compliance", json=body).status_code == 422


def test_simulate_bounded_job():
    req = {"grade": "ultra", "seed": 3, "n_iterations": 5,
           "n_packets_per_user": 50, "n_users": 4, "n_small_cells": 2}
    resp = client.post("/simulate", json=req)
    assert resp.status_code == 200
    body = resp.json()
    assert body["grade"] == "ultra"
    assert body["seed"] == 3
    assert len(body["sum_utility_samples"]) == 5
    assert len(body["deciles"]) == 9
    assert body["mean"] == pytest.approx(
        sum(body["sum_utility_samples"]) / 5)
    # identical request, identical result
    assert client.post("/simulate", json=req).json() == body


def test_simulate_caps_enforced():
    resp = client.post("/simulate", json={"n_iterations": 10000})
    assert resp.status_code == 422


def test_grade_lookup():
    resp = client.get("/grades/ultra")
    assert resp.status_code == 200
    assert resp.json() == {
        "grade": "ultra",
        "availability_min": 0.9999999,
        "reliability_min": 0.99999,
        "latency_fraction": 0.10,
        "device_range": [1, 50],
    }
    resp = client.get("/grades/normal")
    assert resp.json()["availability_min"] == 0.99999
    assert client.get("/grades/bronze").status_code == 422
