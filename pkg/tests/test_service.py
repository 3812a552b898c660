"""HTTP session API: lifecycle, status codes, view model."""

import json

import pytest
from fastapi.testclient import TestClient

from depdiag import service

import corpus


@pytest.fixture
def client():
    app = service.create_app(service.Config())
    with TestClient(app) as c:
        yield c


def create_fig2(client):
    resp = client.post("/sessions", json={
        "program": corpus.FIG2_SRC, "name": "fig2.mjv",
        "test": corpus.FIG2_TEST})
    assert resp.status_code == 201
    return resp.json()


def test_health(client):
    resp = client.get("/health")
    assert resp.status_code == 200
    assert resp.json()["status"] == "ok"


def test_create_session_view_model(client):
    view = create_fig2(client)
    assert view["status"] == "running"
    assert view["highlight_lines"] == [5, 6, 8]
    assert view["action"]["kind"] == "AskQuery"
    assert view["action"]["payload"]["occ"] == "s2#1"
    assert view["counters"]["setup"] == 1
    assert view["source_lines"][3].strip() == "s1=a*c;"
    assert len(view["program_hash"]) == 64


def test_get_is_pure(client):
    view = create_fig2(client)
    sid = view["id"]
    a = client.get(f"/sessions/{sid}").json()
    b = client.get(f"/sessions/{sid}").json()
    assert a == b
    assert a["action"] == view["action"]


def test_full_session_over_http(client):
    view = create_fig2(client)
    sid = view["id"]
    act = view["action"]
    view = client.post(f"/sessions/{sid}/answer", json={
        "action_id": act["action_id"], "verdict": "correct"}).json()
    assert view["highlight_lines"] == [6, 8]
    act = view["action"]
    view = client.post(f"/sessions/{sid}/answer", json={
        "action_id": act["action_id"], "verdict": "correct"}).json()
    assert view["status"] == "localized"
    assert view["highlight_lines"] == [8]
    assert view["localized"]["lines"] == [8]
    report = client.get(f"/sessions/{sid}/report").json()
    assert report["Total2"] == 3 and report["query"] == 2


def test_stale_action_is_conflict(client):
    view = create_fig2(client)
    sid = view["id"]
    resp = client.post(f"/sessions/{sid}/answer", json={
        "action_id": "a999", "verdict": "correct"})
    assert resp.status_code == 409


def test_invalid_answer_is_bad_request(client):
    view = create_fig2(client)
    sid = view["id"]
    resp = client.post(f"/sessions/{sid}/answer", json={
        "action_id": view["action"]["action_id"], "verdict": "maybe"})
    assert resp.status_code == 400


def test_missing_body_fields(client):
    assert client.post("/sessions", json={"program": "x"}).status_code == 400
    view = create_fig2(client)
    resp = client.post(f"/sessions/{view['id']}/answer", json={})
    assert resp.status_code == 400


def test_bad_program_is_unprocessable(client):
    resp = client.post("/sessions", json={
        "program": "class A { broken", "test": corpus.FIG2_TEST})
    assert resp.status_code == 422
    resp = client.post("/sessions", json={
        "program": corpus.FIG2_SRC,
        "test": {"method": "nope", "args": [], "expect": {}}})
    assert resp.status_code == 422


def test_unknown_session_is_404(client):
    assert client.get("/sessions/deadbeef").status_code == 404
    assert client.delete("/sessions/deadbeef").status_code == 404
    assert client.post("/sessions/deadbeef/answer",
                       json={"action_id": "a1"}).status_code == 404


def test_delete_session(client):
    view = create_fig2(client)
    sid = view["id"]
    assert client.delete(f"/sessions/{sid}").status_code == 204
    assert client.get(f"/sessions/{sid}").status_code == 404


def test_expand_requires_composite(client):
    view = create_fig2(client)
    resp = client.post(f"/sessions/{view['id']}/expand",
                       json={"component": "C5"})
    assert resp.status_code == 400


def test_persistence_writes_snapshots(tmp_path):
    app = service.create_app(service.Config(persist_dir=str(tmp_path)))
    with TestClient(app) as client:
        view = create_fig2(client)
        path = tmp_path / f"{view['id']}.json"
        assert path.exists()
        saved = json.loads(path.read_text())
        assert saved["session"]["status"] == "running"
        client.post(f"/sessions/{view['id']}/answer", json={
            "action_id": view["action"]["action_id"], "verdict": "correct"})
        saved = json.loads(path.read_text())
        assert saved["session"]["counters"]["query"] == 1


def test_cors_header_when_configured():
    app = service.create_app(service.Config(allow_origin="http://localhost:5173"))
    with TestClient(app) as client:
        resp = client.get("/health",
                          headers={"Origin": "http://localhost:5173"})
        assert resp.headers.get("access-control-allow-origin") \
            == "http://localhost:5173"
