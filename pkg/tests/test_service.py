"""HTTP surface: validation, payload shapes, determinism."""

import math

import pytest
from fastapi.testclient import TestClient

from modeforge.service import app, dispatch


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as c:
        yield c


def test_health(client):
    body = client.get("/health").json()
    assert body["status"] == "ok"


def test_metrology_endpoint(client):
    r = client.post("/metrology", json={"state": "noon:N=4", "generator": "nlr"})
    assert r.status_code == 200
    rows = r.json()["rows"]
    assert rows[0]["F_numeric"] == pytest.approx(16.0, abs=1e-9)
    assert rows[0]["verdict"] == "heisenberg"


def test_metrology_sweep(client):
    r = client.post("/metrology", json={"state": "unif:N=2", "generator": "nlr",
                                        "sweep": "N=1..5"})
    rows = r.json()["rows"]
    assert [row["N"] for row in rows] == [1, 2, 3, 4, 5]
    for row in rows:
        assert row["F_numeric"] == pytest.approx(row["F_closed_form"], abs=1e-9)


def test_entangle_endpoint(client):
    r = client.post("/entangle", json={"state": "unif:N=3", "bipartition": "LR",
                                       "measures": ["entropy", "negativity", "witness"]})
    assert r.status_code == 200
    body = r.json()
    values = {row["measure"]: row["value"] for row in body["rows"]}
    assert values["entropy"] == pytest.approx(2.0, abs=1e-9)
    assert values["negativity"] == pytest.approx(1.5, abs=1e-9)
    assert body["mode_separable"] is False


def test_teleport_endpoint(client):
    r = client.post("/teleport", json={"resource": "unif:N=6", "M": 2})
    body = r.json()
    assert body["f_closed"] == pytest.approx(1 - 2 / 21, abs=1e-9)
    assert body["f_sim"] == pytest.approx(body["f_closed"], abs=1e-9)
    assert len(body["outcomes"]) == 21
    assert body["mc"] is None


def test_teleport_mc_requires_seed(client):
    r = client.post("/teleport", json={"resource": "unif:N=4", "M": 2, "simulate": "mc"})
    assert r.status_code == 422
    r = client.post("/teleport", json={"resource": "unif:N=4", "M": 2, "seed": 9})
    assert r.status_code == 422
    r = client.post("/teleport", json={"resource": "unif:N=4", "M": 2,
                                       "simulate": "mc", "seed": 9, "samples": 20000})
    assert r.status_code == 200
    assert r.json()["mc"]["seed"] == 9


def test_paradox_endpoint(client):
    r = client.post("/paradox", json={"zeta": 0.5, "xi": 0.5, "eta": 0.5, "n": 2})
    body = r.json()
    assert body["probability"] == pytest.approx(10 / 64, abs=1e-9)
    assert body["negativity_xr"] == pytest.approx((2 + 8 * math.sqrt(2)) / 20, abs=1e-9)
    assert body["verdicts"] == {"input": True, "resource": True, "target": True}


def test_invalid_state_spec_is_422(client):
    r = client.post("/metrology", json={"state": "coh:N=", "generator": "nlr"})
    assert r.status_code == 422
    assert "coh:N=" in r.json()["detail"]


def test_out_of_range_parameter_is_422(client):
    r = client.post("/paradox", json={"zeta": 1.4, "xi": 0.5, "eta": 0.5})
    assert r.status_code == 422


def test_reproduce_all_endpoint(client):
    r = client.post("/reproduce-all", json={"Nmax": 3})
    body = r.json()
    assert r.status_code == 200
    assert body["all_pass"] is True
    assert set(body["tables"]) == {
        "imbalance_two_fock", "imbalance_uniform", "imbalance_coherent",
        "exchange_fock", "teleport_fidelity", "nolabel_entropy", "swap_paradox",
    }


def test_responses_are_deterministic(client):
    payload = {"state": "coh:N=5,xi=0.35,phi=0.2", "generator": "nlr", "sweep": "N=1..6"}
    assert (client.post("/metrology", json=payload).content
            == client.post("/metrology", json=payload).content)


def test_dispatch_matches_endpoint(client):
    payload = {"resource": "fock:N=4,l=2", "M": 2}
    local = dispatch("teleport", payload)
    remote = client.post("/teleport", json=payload).json()
    assert local == remote
