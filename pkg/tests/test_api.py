import logging

import pytest

from api.server import MAX_SEEDS, app


@pytest.fixture
def client():
    app.config["TESTING"] = True
    with app.test_client() as client:
        yield client


def test_home(client):
    res = client.get("/")
    assert res.status_code == 200
    assert res.get_json()["status"] == "ok"


def test_scenarios_lists_the_corpus(client):
    names = client.get("/api/scenarios").get_json()["scenarios"]
    assert "nav_scratch" in names and "manip_healthy" in names


def test_run_corpus_scenario(client):
    res = client.post("/api/run", json={"scenario": "nav_shadow", "seed": 1})
    assert res.status_code == 200
    doc = res.get_json()
    assert doc["run_id"] == "nav_shadow-1"
    assert [r["t_recovery"] for r in doc["records"]] == [700]


def test_run_with_strategy(client):
    res = client.post("/api/run", json={"scenario": "nav_scratch", "strategy": "pod_started"})
    assert res.get_json()["records"][0]["strategy"] == "fallback_pod_started"


def test_unknown_scenario(client):
    res = client.post("/api/run", json={"scenario": "nope"})
    assert res.status_code == 404
    assert "nope" in res.get_json()["error"]


def test_missing_scenario(client):
    assert client.post("/api/run", json={}).status_code == 400


def test_unparsable_text_returns_diagnostics(client):
    res = client.post("/api/run", json={"text": "version: 1\nscenario: broken\n"})
    assert res.status_code == 400
    assert res.get_json()["diagnostics"]


def test_rejected_requests_are_logged(client, caplog):
    with caplog.at_level(logging.WARNING, logger="api.server"):
        client.post("/api/run", json={"scenario": "nope"})
        client.post("/api/run", json={"text": "version: 1\nscenario: broken\n"})
    messages = [r.getMessage() for r in caplog.records if r.name == "api.server"]
    assert messages[0] == "Rejected POST /api/run (404): Unknown scenario 'nope'"
    assert messages[1].startswith("Rejected POST /api/run: ")


def test_bad_strategy(client):
    res = client.post("/api/run", json={"scenario": "nav_scratch", "strategy": "reboot"})
    assert res.status_code == 400


def test_sweep(client):
    res = client.post("/api/sweep", json={"scenario": "manip_scratch", "seeds": [1]})
    rows = res.get_json()["rows"]
    assert [r["strategy"] for r in rows] == [
        "restart_scratch", "fallback_pod_started", "fallback_shadow_execution"]
    assert rows[-1]["t_recovery"] == "650.0"


def test_sweep_seed_limit(client):
    res = client.post("/api/sweep", json={"scenario": "nav_scratch", "seeds": list(range(MAX_SEEDS + 1))})
    assert res.status_code == 400


def test_fleet_defaults(client):
    report = client.get("/api/fleet?trials=10000").get_json()
    assert report["robots"] == 1000
    assert report["failures"] == 8
    assert isinstance(report["placement_count"], str)


def test_fleet_bad_parameters(client):
    assert client.get("/api/fleet?window_s=90").status_code == 400
