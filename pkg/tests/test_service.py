import json

import pytest
from fastapi.testclient import TestClient

from srocmeta.dataio import parse_dataset_text
from srocmeta.pipeline import AnalysisOptions, run_analysis
from srocmeta.report import to_json
from srocmeta.service import create_app
from srocmeta.tables import ContingencyTable, ReaderRecord, StudyDataset

READERS = [
    {"reader_id": "a", "tp": 38, "fp": 3, "fn": 22, "tn": 57},
    {"reader_id": "b", "tp": 42, "fp": 6, "fn": 18, "tn": 54},
    {"reader_id": "c", "tp": 47, "fp": 12, "fn": 13, "tn": 48},
    {"reader_id": "d", "tp": 51, "fp": 20, "fn": 9, "tn": 40},
]


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def test_healthz(client):
    response = client.get("/healthz")
    assert response.status_code == 200
    assert response.json() == {"status": "ok"}


def test_analyze_matches_library(client):
    body = {"label": "svc", "readers": READERS, "bootstrap_b": 100, "seed": 0}
    response = client.post("/analyze", json=body)
    assert response.status_code == 200
    payload = response.json()
    assert payload.get("svg") is None

    records = tuple(
        ReaderRecord(reader_id=r["reader_id"],
                     table=ContingencyTable(r["tp"], r["fp"], r["fn"], r["tn"]))
        for r in READERS
    )
    expected = run_analysis(StudyDataset(records, label="svc"),
                            AnalysisOptions(bootstrap_b=100, seed=0))
    assert payload["report"] == json.loads(to_json(expected))


def test_analyze_with_svg_and_ai(client):
    body = {"label": "svc", "readers": READERS, "bootstrap_b": 100, "seed": 1,
            "include_svg": True, "ai_auc": 0.9, "model": "phm"}
    response = client.post("/analyze", json=body)
    assert response.status_code == 200
    payload = response.json()
    assert payload["svg"].startswith("<svg")
    assert payload["report"]["ai_comparison"]["ai_auc"] == 0.9


def test_analyze_validation_errors(client):
    # pydantic-level: negative count
    bad = {"label": "x", "readers": [dict(READERS[0], tp=-1)]}
    assert client.post("/analyze", json=bad).status_code == 422
    # pydantic-level: empty diseased arm
    bad = {"label": "x", "readers": [dict(READERS[0], tp=0, fn=0)]}
    assert client.post("/analyze", json=bad).status_code == 422
    # domain-level: duplicate reader ids
    bad = {"label": "x", "readers": [READERS[0], READERS[0], READERS[1]]}
    response = client.post("/analyze", json=bad)
    assert response.status_code == 422
    assert "duplicate" in response.json()["detail"]
    # domain-level: too few readers for a random-effects bivariate fit
    bad = {"label": "x", "readers": READERS[:2]}
    response = client.post("/analyze", json=bad)
    assert response.status_code == 422


def test_simulate_endpoint(client):
    body = {"n_readers": 5, "n_diseased": 40, "n_healthy": 60,
            "theta_true": 0.3, "tau": 0.1, "fpr_logit_sd": 0.2, "seed": 8}
    response = client.post("/simulate", json=body)
    assert response.status_code == 200
    payload = response.json()
    ds = parse_dataset_text(payload["csv"])
    assert ds.n_readers == payload["n_readers"] == 5
    assert all(r.table.n_diseased == 40 for r in ds.records)


def test_coverage_endpoint(client):
    body = {"sim": {"n_readers": 5, "n_diseased": 60, "n_healthy": 60,
                    "theta_true": 0.25, "tau": 0.15, "fpr_logit_sd": 0.3, "seed": 4},
            "n_sims": 8, "engine": "phm"}
    response = client.post("/coverage", json=body)
    assert response.status_code == 200
    payload = response.json()
    assert payload["n_sims"] == 8
    assert 0.0 <= payload["coverage"] <= 1.0


def test_openapi_lists_endpoints(client):
    spec = client.get("/openapi.json").json()
    assert set(spec["paths"]) >= {"/analyze", "/simulate", "/coverage", "/healthz"}
