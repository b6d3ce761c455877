import pytest
from fastapi.testclient import TestClient

from hopt.service import create_app


SPACE = {
    "x": {"type": "float", "low": 0.0, "high": 1.0},
    "opt": {"type": "choice", "options": ["adam", "sgd"]},
}


@pytest.fixture
def client():
    with TestClient(create_app()) as c:
        yield c


def make_session(client, **overrides):
    body = {"space": SPACE, "direction": "maximize", "steps": 10, "seed": 0}
    body.update(overrides)
    resp = client.post("/sessions", json=body)
    assert resp.status_code == 201, resp.text
    return resp.json()


class TestValidate:
    def test_valid_space(self, client):
        resp = client.post("/spaces/validate", json={"space": SPACE})
        assert resp.status_code == 200
        assert resp.json() == {"valid": True, "violations": []}

    def test_invalid_space_lists_violations(self, client):
        bad = {"lr": {"type": "float", "low": -1.0, "high": 1.0, "log": True}}
        resp = client.post("/spaces/validate", json={"space": bad})
        body = resp.json()
        assert body["valid"] is False
        assert any("log requires low > 0" in v for v in body["violations"])

    def test_unknown_type_reported(self, client):
        resp = client.post("/spaces/validate", json={"space": {"a": {"type": "tensor"}}})
        assert resp.json()["valid"] is False


class TestSessions:
    def test_create_returns_info(self, client):
        info = make_session(client)
        assert info["budget_mode"] == "steps"
        assert info["budget_total"] == 10
        assert info["phase"] == "random_search"
        assert info["temperature"] == 1.0

    def test_both_budgets_rejected(self, client):
        resp = client.post(
            "/sessions", json={"space": SPACE, "steps": 10, "runtime": "1h"}
        )
        assert resp.status_code == 422

    def test_neither_budget_rejected(self, client):
        assert client.post("/sessions", json={"space": SPACE}).status_code == 422

    def test_invalid_space_rejected(self, client):
        bad = {"a": {"type": "int", "low": 9, "high": 2}}
        resp = client.post("/sessions", json={"space": bad, "steps": 5})
        assert resp.status_code == 422

    def test_runtime_string_budget(self, client):
        info = make_session(client, steps=None, runtime="2min")
        assert info["budget_mode"] == "wallclock"
        assert info["budget_total"] == 120.0

    def test_unknown_session_404(self, client):
        assert client.get("/sessions/nope").status_code == 404

    def test_delete_closes(self, client):
        sid = make_session(client)["session_id"]
        assert client.delete(f"/sessions/{sid}").status_code == 204
        assert client.get(f"/sessions/{sid}").status_code == 404


class TestAskTell:
    def test_suggest_report_loop(self, client):
        sid = make_session(client, steps=6)["session_id"]
        best = None
        for _ in range(6):
            suggestion = client.post(f"/sessions/{sid}/suggest").json()
            assert set(suggestion["values"]) == {"x", "opt"}
            value = suggestion["values"]["x"]
            reply = client.post(
                f"/sessions/{sid}/report",
                json={"candidate_id": suggestion["candidate_id"], "value": value},
            ).json()
            if best is None or value > best:
                best = value
                assert reply["new_best"] is True
            assert reply["best_value"] == best
        assert reply["exhausted"] is True

    def test_suggest_after_exhaustion_409(self, client):
        sid = make_session(client, steps=1)["session_id"]
        suggestion = client.post(f"/sessions/{sid}/suggest").json()
        client.post(
            f"/sessions/{sid}/report",
            json={"candidate_id": suggestion["candidate_id"], "value": 1.0},
        )
        assert client.post(f"/sessions/{sid}/suggest").status_code == 409

    def test_unknown_candidate_409(self, client):
        sid = make_session(client)["session_id"]
        resp = client.post(
            f"/sessions/{sid}/report", json={"candidate_id": "c999999", "value": 1.0}
        )
        assert resp.status_code == 409

    def test_failed_report_accepted(self, client):
        sid = make_session(client)["session_id"]
        suggestion = client.post(f"/sessions/{sid}/suggest").json()
        reply = client.post(
            f"/sessions/{sid}/report",
            json={
                "candidate_id": suggestion["candidate_id"],
                "status": "failed",
                "error": "OOM",
            },
        ).json()
        assert reply["status"] == "failed" and reply["best_value"] is None

    def test_enqueue_runs_before_sampling(self, client):
        sid = make_session(client)["session_id"]
        queued = client.post(
            f"/sessions/{sid}/enqueue", json={"values": {"x": 0.5}}
        ).json()
        assert queued["queue_length"] == 1
        assert queued["values"]["x"] == 0.5
        assert queued["values"]["opt"] in ("adam", "sgd")
        suggestion = client.post(f"/sessions/{sid}/suggest").json()
        assert suggestion["candidate_id"] == queued["candidate_id"]
        assert suggestion["origin"] == "queued"

    def test_enqueue_out_of_domain_422(self, client):
        sid = make_session(client)["session_id"]
        resp = client.post(f"/sessions/{sid}/enqueue", json={"values": {"x": 5.0}})
        assert resp.status_code == 422


class TestReadouts:
    def fill(self, client, sid, n):
        for i in range(n):
            suggestion = client.post(f"/sessions/{sid}/suggest").json()
            client.post(
                f"/sessions/{sid}/report",
                json={"candidate_id": suggestion["candidate_id"], "value": float(i)},
            )

    def test_statistics(self, client):
        sid = make_session(client, steps=5)["session_id"]
        self.fill(client, sid, 5)
        stats = client.get(f"/sessions/{sid}/statistics").json()
        assert stats["count"] == 5
        assert stats["mean"] == 2.0
        assert stats["percentiles"]["100"] == 4.0

    def test_history_csv(self, client):
        sid = make_session(client, steps=3)["session_id"]
        self.fill(client, sid, 3)
        resp = client.get(f"/sessions/{sid}/history.csv")
        assert resp.status_code == 200
        lines = resp.text.strip().split("\n")
        assert lines[0] == "id,origin,status,value,opt,x,started_at,ended_at"
        assert len(lines) == 4

    def test_result(self, client):
        sid = make_session(client, steps=2)["session_id"]
        self.fill(client, sid, 2)
        doc = client.get(f"/sessions/{sid}/result").json()
        assert doc["best"]["value"] == 1.0
        assert doc["no_successful_evaluation"] is False
        assert doc["direction"] == "maximize"

    def test_result_without_success(self, client):
        sid = make_session(client, steps=2)["session_id"]
        doc = client.get(f"/sessions/{sid}/result").json()
        assert doc["best"] is None and doc["no_successful_evaluation"] is True


class TestDeterminism:
    def test_same_seed_same_suggestions(self, client):
        a = make_session(client, seed=42)["session_id"]
        b = make_session(client, seed=42)["session_id"]
        va = client.post(f"/sessions/{a}/suggest").json()["values"]
        vb = client.post(f"/sessions/{b}/suggest").json()["values"]
        assert va == vb
