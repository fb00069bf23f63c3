import json
import threading

import pytest
from fastapi.testclient import TestClient

from mitigator.service import create_app


@pytest.fixture()
def client():
    return TestClient(create_app())


def create_session(client, **overrides):
    body = {"policy": "builtin"}
    body.update(overrides)
    resp = client.post("/sessions", json=body)
    assert resp.status_code == 201, resp.text
    return resp.json()["session_id"]


class TestCreateSession:
    def test_builtin_policy(self, client):
        resp = client.post("/sessions", json={"policy": "builtin"})
        assert resp.status_code == 201
        body = resp.json()
        assert len(body["session_id"]) >= 16
        assert body["policy_name"] == "default"

    def test_inline_invalid_policy(self, client):
        resp = client.post("/sessions", json={"policy": "step 1: Restatement\n"})
        assert resp.status_code == 400
        assert resp.json()["diagnostics"]

    def test_distinct_session_ids(self, client):
        assert create_session(client) != create_session(client)

    def test_invalid_thresholds(self, client):
        resp = client.post("/sessions", json={
            "policy": "builtin", "thresholds": {"t_a": 0.8, "t_b": 0.2},
        })
        assert resp.status_code == 400


class TestObservations:
    def test_productive_observation(self, client):
        sid = create_session(client)
        resp = client.post(f"/sessions/{sid}/observations", json={
            "level": 0.5, "induction": "complex_information",
        })
        assert resp.status_code == 200
        assert resp.json()["zone"] == "productive_confusion"

    def test_unknown_session_404(self, client):
        resp = client.post("/sessions/nope/observations", json={"level": 0.5})
        assert resp.status_code == 404

    def test_missing_induction_422(self, client):
        sid = create_session(client)
        resp = client.post(f"/sessions/{sid}/observations", json={"level": 0.5})
        assert resp.status_code == 422

    def test_observation_after_end_409(self, client):
        sid = create_session(client, limits={
            "frustration_after": 1, "boredom_after": 1, "disengage_after": 1,
        })
        for _ in range(5):
            resp = client.post(f"/sessions/{sid}/observations", json={
                "level": 0.9, "induction": "false_feedback",
            })
            if resp.status_code == 409:
                break
            client.get(f"/sessions/{sid}/next-act")
        assert resp.status_code == 409


class TestNextAct:
    def test_recommendation_matches_builtin_table(self, client):
        sid = create_session(client)
        client.post(f"/sessions/{sid}/observations", json={
            "level": 0.5, "induction": "complex_information",
        })
        resp = client.get(f"/sessions/{sid}/next-act")
        assert resp.status_code == 200
        assert resp.json()["act_type"] == "information_supplement"

    def test_engaged_yields_null(self, client):
        sid = create_session(client)
        client.post(f"/sessions/{sid}/observations", json={"level": 0.1})
        resp = client.get(f"/sessions/{sid}/next-act")
        assert resp.status_code == 200
        assert resp.json() is None

    def test_double_call_409(self, client):
        sid = create_session(client)
        client.post(f"/sessions/{sid}/observations", json={
            "level": 0.5, "induction": "complex_information",
        })
        client.get(f"/sessions/{sid}/next-act")
        resp = client.get(f"/sessions/{sid}/next-act")
        assert resp.status_code == 409


class TestTranscriptAndStream:
    def test_fresh_transcript_empty(self, client):
        sid = create_session(client)
        assert client.get(f"/sessions/{sid}/transcript").json() == []

    def test_event_order_after_one_turn(self, client):
        sid = create_session(client)
        client.post(f"/sessions/{sid}/observations", json={
            "level": 0.5, "induction": "complex_information",
        })
        client.get(f"/sessions/{sid}/next-act")
        kinds = [e["kind"] for e in client.get(f"/sessions/{sid}/transcript").json()]
        assert kinds == ["observation_recorded", "policy_switched", "act_emitted"]

    def test_stream_agrees_with_transcript_prefix(self, client):
        sid = create_session(client)
        client.post(f"/sessions/{sid}/observations", json={
            "level": 0.5, "induction": "complex_information",
        })
        client.get(f"/sessions/{sid}/next-act")
        streamed = []
        ids = []
        # follow=false closes the stream once the backlog is drained
        with client.stream("GET", f"/sessions/{sid}/events?follow=false") as resp:
            for line in resp.iter_lines():
                if line.startswith("id: "):
                    ids.append(int(line[len("id: "):]))
                elif line.startswith("data: "):
                    streamed.append(json.loads(line[len("data: "):]))
        full = client.get(f"/sessions/{sid}/transcript").json()
        assert streamed == full
        assert ids == list(range(1, len(full) + 1))

    def test_stream_resumes_from_last_event_id(self, client):
        sid = create_session(client)
        client.post(f"/sessions/{sid}/observations", json={
            "level": 0.5, "induction": "complex_information",
        })
        client.get(f"/sessions/{sid}/next-act")
        streamed = []
        with client.stream(
            "GET", f"/sessions/{sid}/events?follow=false",
            headers={"Last-Event-ID": "2"},
        ) as resp:
            for line in resp.iter_lines():
                if line.startswith("data: "):
                    streamed.append(json.loads(line[len("data: "):]))
        full = client.get(f"/sessions/{sid}/transcript").json()
        assert streamed == full[2:]


class TestOverride:
    def test_override_logged_with_flag(self, client):
        sid = create_session(client)
        client.post(f"/sessions/{sid}/observations", json={
            "level": 0.5, "induction": "complex_information",
        })
        client.get(f"/sessions/{sid}/next-act")
        resp = client.post(f"/sessions/{sid}/acts", json={"act_type": "subject_change"})
        assert resp.status_code == 200
        assert resp.json()["overridden"] is True
        events = client.get(f"/sessions/{sid}/transcript").json()
        assert events[-1]["payload"]["act_type"] == "subject_change"
        assert events[-1]["payload"]["overridden"] is True

    def test_invalid_act_type_422(self, client):
        sid = create_session(client)
        resp = client.post(f"/sessions/{sid}/acts", json={"act_type": "mystery"})
        assert resp.status_code == 422


class TestPolicies:
    def test_builtin_source_exposed(self, client):
        body = client.get("/policies/builtin").json()
        assert "[general]" in body["source"]
        assert body["name"] == "default"

    def test_validate_endpoint(self, client):
        ok = client.post("/policies/validate", json={
            "source": client.get("/policies/builtin").json()["source"],
        }).json()
        assert ok["valid"] is True and ok["diagnostics"] == []
        bad = client.post("/policies/validate", json={"source": "nope"}).json()
        assert bad["valid"] is False
        assert bad["diagnostics"][0]["line"] >= 1


def test_journal_written(tmp_path):
    client = TestClient(create_app(journal_dir=str(tmp_path)))
    sid = create_session(client)
    client.post(f"/sessions/{sid}/observations", json={
        "level": 0.5, "induction": "complex_information",
    })
    client.get(f"/sessions/{sid}/next-act")
    journal = tmp_path / f"{sid}.jsonl"
    lines = journal.read_text().splitlines()
    assert json.loads(lines[0])["session_id"] == sid
    assert len(lines) == 4  # header + three events


def test_concurrent_observations_serialize(client=None):
    client = TestClient(create_app())
    sid = create_session(client)
    client.post(f"/sessions/{sid}/observations", json={
        "level": 0.5, "induction": "complex_information",
    })

    errors = []

    def turn():
        try:
            client.post(f"/sessions/{sid}/observations", json={"level": 0.6})
            client.get(f"/sessions/{sid}/next-act")
        except Exception as exc:  # pragma: no cover
            errors.append(exc)

    threads = [threading.Thread(target=turn) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not errors
    events = client.get(f"/sessions/{sid}/transcript").json()
    acts = [e for e in events if e["kind"] == "act_emitted"]
    turns = [a["turn"] for a in acts]
    assert turns == sorted(set(turns))
