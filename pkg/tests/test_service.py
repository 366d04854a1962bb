import numpy as np
import pytest

from telesim.service import create_app


@pytest.fixture(scope="module")
def client():
    from fastapi.testclient import TestClient

    with TestClient(create_app()) as c:
        yield c


def small_config(**extra):
    config = {
        "setup": {"coupling_1": 0.05, "coupling_2": 0.05, "cutoff": 4},
        "scenarios": [{"kind": "threefold"}, {"kind": "fourfold"}],
        "baseline_trials": 10_000,
        "seed": 1,
    }
    config.update(extra)
    return config


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    body = response.json()
    assert body["status"] == "ok"


def test_run_endpoint_reports_both_scenarios(client):
    response = client.post("/run", json={"config": small_config()})
    assert response.status_code == 200
    body = response.json()
    rows = {r["scenario"]: r for r in body["report"]["scenarios"]}
    assert rows["threefold"]["fidelity_extrapolated"] == pytest.approx(0.5, abs=1e-3)
    assert rows["fourfold"]["fidelity_extrapolated"] == pytest.approx(1.0, abs=1e-3)
    assert rows["threefold"]["exceeds_classical_baseline"] is False
    assert rows["fourfold"]["exceeds_classical_baseline"] is True
    scenario = body["scenarios"][0]
    assert scenario["rho3"] is None


def test_run_endpoint_can_return_state(client):
    response = client.post("/run", json={"config": small_config(), "include_rho3": True})
    assert response.status_code == 200
    scenario = response.json()["scenarios"][0]
    matrix = np.array(scenario["rho3"]["real"]) + 1j * np.array(scenario["rho3"]["imag"])
    assert np.trace(matrix).real == pytest.approx(1.0, abs=1e-9)
    assert scenario["rho3_occupations"][0] == [0, 0]


def test_run_endpoint_marks_structural_zero(client):
    config = small_config()
    config["setup"]["coupling_1"] = 0.0
    config["setup"]["coupling_2"] = 0.0
    response = client.post("/run", json={"config": config})
    assert response.status_code == 200
    rows = response.json()["report"]["scenarios"]
    assert all(r["structurally_zero"] for r in rows)


def test_run_endpoint_rejects_unknown_keys(client):
    config = small_config()
    config["setup"]["coupling_3"] = 0.1
    response = client.post("/run", json={"config": config})
    assert response.status_code == 422
    assert "coupling_3" in response.text


def test_run_endpoint_rejects_out_of_range(client):
    config = small_config()
    config["setup"]["coupling_1"] = 1.5
    response = client.post("/run", json={"config": config})
    assert response.status_code == 422


def test_sweep_endpoint_rows_sorted_and_monotone(client):
    config = small_config(sweep={"parameter": "coupling_ratio", "values": [4.0, 1.0, 2.0]})
    config["setup"] = {"coupling_1": 0.02, "coupling_2": 0.02}
    response = client.post("/sweep", json={"config": config})
    assert response.status_code == 200
    rows = response.json()["rows"]
    assert [r["ratio"] for r in rows] == [1.0, 2.0, 4.0]
    fidelities = [r["fidelity"] for r in rows]
    assert fidelities[0] < fidelities[1] < fidelities[2]


def test_sweep_endpoint_requires_sweep_section(client):
    response = client.post("/sweep", json={"config": small_config()})
    assert response.status_code == 422


def test_validate_endpoint_all_green(client):
    response = client.post("/validate", json={"cutoff": 4, "seed": 7})
    assert response.status_code == 200
    body = response.json()
    assert body["all_passed"] is True
    names = {c["name"] for c in body["checks"]}
    assert "oracle_equivalence" in names
    assert "povm_completeness" in names


def test_validate_endpoint_perturbation_hook(client):
    response = client.post("/validate", json={"cutoff": 4, "seed": 7, "perturb_bs_sign": True})
    body = response.json()
    checks = {c["name"]: c["passed"] for c in body["checks"]}
    assert checks["pinned_bs_convention"] is False
    assert checks["lift_unitarity"] is True
    assert body["all_passed"] is False


def test_tomography_endpoint(client):
    config = small_config(tomography={"shots": 20_000})
    config["setup"] = {"coupling_1": 0.02, "coupling_2": 0.02}
    response = client.post("/tomography", json={"config": config})
    assert response.status_code == 200
    summary = response.json()["summary"]
    assert summary["extrapolated_vacuum_weight"]["value"] == pytest.approx(0.5, abs=1e-5)
    assert summary["sampled"]["vacuum_weight_estimate"] == pytest.approx(0.5, abs=0.02)
    assert summary["exact"]["fidelity_to_truth"] >= 1 - 1e-8
