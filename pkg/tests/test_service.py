"""HTTP API tests exercising the service through a real test client."""
import json
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from pluralis import (
    FingerprintMismatchError,
    coverage_to_json,
    init_preference_model,
    load_momdp_file,
    pareto_set_bruteforce,
    replay_session,
    reselect_policy,
)
from pluralis.service import build_app, create_app

ENVS = Path(__file__).parent.parent / "envs"


@pytest.fixture(scope="module")
def bandit_env():
    momdp = load_momdp_file(ENVS / "bandit_three_arm.json")
    return momdp, pareto_set_bruteforce(momdp)


@pytest.fixture(scope="module")
def client(bandit_env):
    momdp, cs = bandit_env
    return TestClient(create_app(momdp, cs))


def new_session(client, **overrides):
    resp = client.post("/api/session", json=overrides)
    assert resp.status_code == 200
    return resp.json()


class TestStaticEndpoints:
    def test_momdp_summary(self, client, bandit_env):
        momdp, _ = bandit_env
        doc = client.get("/api/momdp").json()
        assert doc["num_states"] == 2
        assert doc["d"] == 2
        assert doc["gamma"] == 1.0
        assert doc["horizon"] == 1
        assert doc["terminal_states"] == [1]
        assert doc["objective_labels"] == ["first", "second"]
        assert doc["fingerprint"] == momdp.fingerprint
        assert doc["grid"] is None

    def test_momdp_summary_reports_grid_shape(self):
        momdp = load_momdp_file(ENVS / "gridworld_2x2.json")
        cs = pareto_set_bruteforce(momdp)
        grid_client = TestClient(create_app(momdp, cs))
        doc = grid_client.get("/api/momdp").json()
        assert doc["grid"]["rows"] == 2
        assert doc["grid"]["cols"] == 2

    def test_coverage_document_matches_serializer_exactly(self, client, bandit_env):
        _, cs = bandit_env
        resp = client.get("/api/coverage")
        assert resp.status_code == 200
        expected = coverage_to_json(cs)
        assert resp.json() == expected
        assert json.dumps(resp.json(), sort_keys=True) == json.dumps(
            expected, sort_keys=True
        )

    def test_fingerprint_mismatch_refuses_to_build(self, bandit_env):
        _, cs = bandit_env
        other = load_momdp_file(ENVS / "bandit_two_arm.json")
        with pytest.raises(FingerprintMismatchError):
            create_app(other, cs)


class TestSessionLifecycle:
    def test_create_returns_uniform_prior_selection(self, client, bandit_env):
        _, cs = bandit_env
        doc = new_session(client)
        expected = reselect_policy(init_preference_model(20, 2, 5.0), cs)
        assert doc["policy_id"] == expected.policy_id
        assert doc["state"]["policy_id"] == expected.policy_id
        assert len(doc["session_id"]) == 32

    def test_state_reports_full_snapshot(self, client):
        doc = new_session(client)
        state = client.get(f"/api/session/{doc['session_id']}/state").json()
        assert set(state) == {
            "step", "episode", "episode_step", "state", "terminal",
            "policy_id", "value", "welfare", "per_stakeholder_utilities",
            "posterior_summary", "switches", "grid_view",
        }
        assert state["step"] == 0
        assert state["switches"] == 0

    def test_unknown_session_is_404_with_error_shape(self, client):
        resp = client.get("/api/session/deadbeef/state")
        assert resp.status_code == 404
        doc = resp.json()
        assert "unknown session deadbeef" in doc["error"]
        assert doc["path"] == ""

    def test_sessions_are_independent(self, client):
        a = new_session(client)
        b = new_session(client)
        client.post(f"/api/session/{a['session_id']}/step", json={"count": 3})
        state_b = client.get(f"/api/session/{b['session_id']}/state").json()
        assert state_b["step"] == 0

    def test_create_rejects_bad_beta(self, client):
        resp = client.post("/api/session", json={"beta": -1.0})
        assert resp.status_code == 400
        assert "beta" in resp.json()["error"]

    def test_create_with_jury_reports_member_utilities(self, client):
        jury_doc = json.loads((ENVS / "jury_demo.json").read_text())
        doc = new_session(client, jury=jury_doc)
        ids = [u["id"] for u in doc["state"]["per_stakeholder_utilities"]]
        assert ids == ["alice", "bob", "carol"]


class TestPreferences:
    def test_explicit_weights_select_objective_optimum(self, client):
        doc = new_session(client)
        resp = client.post(
            f"/api/session/{doc['session_id']}/preferences",
            json={"weights": [1.0, 0.0]},
        )
        assert resp.status_code == 200
        body = resp.json()
        assert body["policy_id"] == 0
        assert body["utility"] == 3.0
        utilities = [u for _, u in body["ranking"]]
        assert utilities == sorted(utilities, reverse=True)

    def test_utility_spec_selection(self, client):
        doc = new_session(client)
        resp = client.post(
            f"/api/session/{doc['session_id']}/preferences",
            json={"utility_spec": {"variant": "ggf", "weights": [0.7, 0.3]}},
        )
        assert resp.status_code == 200
        assert resp.json() == {
            "policy_id": 2,
            "utility": 2.0,
            "ranking": [[2, 2.0], [1, 1.5], [0, 0.3 * 3.0]],
        }

    def test_wrong_dimension_weights_rejected(self, client):
        doc = new_session(client)
        resp = client.post(
            f"/api/session/{doc['session_id']}/preferences",
            json={"weights": [0.5, 0.3, 0.2]},
        )
        assert resp.status_code == 400
        assert "expected 2" in resp.json()["error"]

    def test_both_args_rejected(self, client):
        doc = new_session(client)
        resp = client.post(
            f"/api/session/{doc['session_id']}/preferences",
            json={"weights": [1.0, 0.0], "utility_spec": {"variant": "nsw"}},
        )
        assert resp.status_code == 400
        assert "exactly one" in resp.json()["error"]

    def test_bad_utility_spec_reports_json_path(self, client):
        doc = new_session(client)
        resp = client.post(
            f"/api/session/{doc['session_id']}/preferences",
            json={"utility_spec": {"variant": "no_such_welfare"}},
        )
        assert resp.status_code == 400
        assert resp.json()["path"]


class TestFeedbackAndSteps:
    def test_approve_never_apologizes(self, client):
        doc = new_session(client)
        resp = client.post(
            f"/api/session/{doc['session_id']}/feedback", json={"kind": "approve"}
        )
        assert resp.json() == {
            "apology": False,
            "switched": False,
            "policy_id": doc["policy_id"],
        }

    def test_disapprove_apologizes(self, client):
        doc = new_session(client, resolution=2)
        resp = client.post(
            f"/api/session/{doc['session_id']}/feedback", json={"kind": "disapprove"}
        )
        body = resp.json()
        assert body["apology"] is True

    def test_invalid_feedback_kind_is_400_with_path(self, client):
        doc = new_session(client)
        resp = client.post(
            f"/api/session/{doc['session_id']}/feedback", json={"kind": "meh"}
        )
        assert resp.status_code == 400
        assert resp.json()["path"] == "kind"

    def test_step_advances_and_returns_state(self, client):
        doc = new_session(client)
        state = client.post(
            f"/api/session/{doc['session_id']}/step", json={"count": 4}
        ).json()
        assert state["step"] == 4

    def test_step_count_bounds_enforced(self, client):
        doc = new_session(client)
        for bad in (0, -3, 10_001):
            resp = client.post(
                f"/api/session/{doc['session_id']}/step", json={"count": bad}
            )
            assert resp.status_code == 400
            assert resp.json()["path"] == "count"

    def test_malformed_body_reports_field_path(self, client):
        doc = new_session(client)
        resp = client.post(
            f"/api/session/{doc['session_id']}/step", json={"count": "many"}
        )
        assert resp.status_code == 400
        assert resp.json()["path"] == "count"


class TestLogEndpoint:
    def test_log_replays_to_identical_session(self, client, bandit_env):
        momdp, cs = bandit_env
        doc = new_session(client, seed=5)
        sid = doc["session_id"]
        client.post(f"/api/session/{sid}/step", json={"count": 3})
        client.post(f"/api/session/{sid}/feedback", json={"kind": "disapprove"})
        client.post(f"/api/session/{sid}/step", json={"count": 2})
        client.post(f"/api/session/{sid}/feedback", json={"kind": "approve"})
        client.post(f"/api/session/{sid}/preferences", json={"weights": [0.0, 1.0]})

        resp = client.get(f"/api/session/{sid}/log")
        assert resp.status_code == 200
        assert resp.headers["content-type"].startswith("application/x-ndjson")
        records = [json.loads(line) for line in resp.text.splitlines()]
        assert records[0]["record"] == "session_init"

        replayed = replay_session(momdp, cs, records)
        assert replayed.log_jsonl() == resp.text
        state = client.get(f"/api/session/{sid}/state").json()
        assert replayed.state_dict() == state


class TestStaticUi:
    def test_build_app_serves_ui_directory(self, tmp_path):
        (tmp_path / "index.html").write_text("<h1>steering</h1>")
        app = build_app(
            cs_path=_coverage_file(tmp_path),
            env_path=ENVS / "bandit_three_arm.json",
            ui_dir=tmp_path,
        )
        ui_client = TestClient(app)
        assert "steering" in ui_client.get("/").text
        assert ui_client.get("/api/momdp").status_code == 200

    def test_missing_ui_directory_rejected(self, tmp_path):
        with pytest.raises(Exception, match="does not exist"):
            build_app(
                cs_path=_coverage_file(tmp_path),
                env_path=ENVS / "bandit_three_arm.json",
                ui_dir=tmp_path / "nope",
            )


def _coverage_file(tmp_path):
    from pluralis import save_coverage

    momdp = load_momdp_file(ENVS / "bandit_three_arm.json")
    path = tmp_path / "coverage.json"
    save_coverage(pareto_set_bruteforce(momdp), path)
    return path
