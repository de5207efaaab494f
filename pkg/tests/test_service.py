import pytest
from fastapi.testclient import TestClient

from muse import __version__, corpus
from muse.service import create_app
from muse.solve import SolverConfig, SolverSet

from conftest import GOLDEN


def body(sem, sol, **extra):
    return {"problem": corpus.read(sem), "solution": corpus.read(sol), **extra}


@pytest.fixture(scope="module")
def client():
    # a canned "solver" keeps these tests independent of any installed binary
    canned = SolverConfig("canned", "smt", "{python}", ("-c", "print('unsat')", "{file}"))
    with TestClient(create_app(SolverSet([canned], "test"))) as c:
        yield c


def test_health(client):
    r = client.get("/health")
    assert r.status_code == 200
    assert r.json() == {"status": "ok", "version": __version__, "backends": ["canned (smt)"]}


def test_classify(client):
    r = client.post("/classify", json=body("loop.sem", "loop.sol"))
    assert r.status_code == 200
    data = r.json()
    assert data["recommended"] == "CHC" and data["spec_polarity"] == {"Sem_L": "negative"}


def test_encode_matches_golden(client):
    r = client.post("/encode", json=body("buchi.sem", "buchi.sol"))
    assert r.status_code == 200
    data = r.json()
    assert data["encoding_kind"] == "MUCLP" and not data["falsify"]
    assert data["text"] == (GOLDEN / "buchi.muclp").read_text()


def test_verify_uses_configured_solvers(client):
    r = client.post("/verify", json=body("max2.sem", "max2.sol"))
    assert r.status_code == 200
    data = r.json()
    assert (data["verdict"], data["backend"], data["encoding_kind"]) == ("valid", "canned", "SMT")


def test_oracle(client):
    r = client.post("/oracle", json=body("order_ab.sem", "unit.sol", domain="-3..3"))
    assert r.status_code == 200
    assert r.json()["verdict"] == "invalid" and r.json()["bounded"]


@pytest.mark.parametrize(
    "route,payload,status,code,fragment",
    [
        ("/oracle", body("max2.sem", "max2.sol", domain="5..0"), 400, 64, "empty interval"),
        ("/oracle", body("max2.sem", "max2.sol", domain="-100..100"), 422, 65, "smaller interval"),
        ("/encode", body("buchi.sem", "buchi.sol", backend="chc"), 422, 65, "not CHC-like"),
        ("/classify", {"problem": "(bogus", "solution": ""}, 422, 65, "<problem>"),
    ],
)
def test_error_mapping(client, route, payload, status, code, fragment):
    r = client.post(route, json=payload)
    assert r.status_code == status
    assert r.json()["exit_code"] == code and fragment in r.json()["error"]


def test_request_validation(client):
    r = client.post("/verify", json={**body("max2.sem", "max2.sol"), "backend": "z3"})
    assert r.status_code == 422 and "detail" in r.json()
    r = client.post("/oracle", json=body("max2.sem", "max2.sol"))  # no domain
    assert r.status_code == 422
