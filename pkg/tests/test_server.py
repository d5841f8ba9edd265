"""HTTP service: endpoints, job lifecycle, leaderboards, crash recovery."""

import time

import pytest
from fastapi.testclient import TestClient

from ofc.checker_eval import run_baseline
from ofc.datasets import fixture_path, load_factbench, load_factqa
from ofc.pipeline import Solver, SolverRegistry
from ofc.processors import split_sentences
from ofc.server import create_app
from ofc.solvers import build_default_registry
from ofc.store import Store
from ofc.types import Claim, Label, Verdict
from ofc.verifiers import aggregate_document

INLINE_CONFIG = {
    "pipeline_id": "mock-check",
    "solvers": [
        {
            "name": "check",
            "kind": "other",
            "implementation": "mock.check.v1",
            "input_name": "document",
            "output_name": "verdicts",
        }
    ],
}

MISMATCHED_CONFIG = {
    "pipeline_id": "broken",
    "solvers": [
        {
            "name": "a",
            "kind": "other",
            "implementation": "mock.check.v1",
            "input_name": "document",
            "output_name": "verdicts",
        },
        {
            "name": "b",
            "kind": "other",
            "implementation": "mock.check.v1",
            "input_name": "something_else",
            "output_name": "verdicts2",
        },
    ],
}


class MockCheckSolver(Solver):
    def run(self, state, value):
        document = value if isinstance(value, str) else state.document
        verdicts = {}
        for sentence in split_sentences(document):
            claim = Claim(text=sentence)
            state.claims.append(claim)
            label = Label.FALSE if "wrong" in sentence else Label.TRUE
            verdicts[claim.id] = Verdict(claim_id=claim.id, label=label)
        state.verdicts = verdicts
        state.document_verdict = aggregate_document(list(verdicts.values()))
        return verdicts


def make_test_registry():
    registry = build_default_registry()
    registry.register(
        "mock.check.v1", "other", "document", "verdicts",
        lambda params, runtime: MockCheckSolver(),
    )
    return registry


@pytest.fixture
def client(tmp_path):
    app = create_app(data_dir=tmp_path, registry=make_test_registry(), workers=2)
    with TestClient(app) as c:
        yield c
    app.state.jobs.shutdown()


def poll_job(client, job_id, timeout=10.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        body = client.get(f"/v1/jobs/{job_id}").json()
        if body["job"]["status"] in ("done", "failed"):
            return body["job"]
        time.sleep(0.02)
    raise AssertionError(f"job {job_id} did not finish")


def baseline_submission_body(publish=True, submission_id="sub-always-true"):
    gold = load_factbench(fixture_path("factbench.jsonl"))
    baseline = run_baseline(gold, "always_true")
    return {
        "submission_id": submission_id,
        "system_name": baseline.system_name,
        "dataset_id": "factbench",
        "predictions": baseline.predictions,
        "total_latency_s": 12.5,
        "total_cost_usd": 0.0,
        "publish": publish,
    }


class TestSolversEndpoint:
    def test_listing(self, client):
        body = client.get("/v1/solvers").json()
        assert body["schema_version"] == 1
        assert len(body["solvers"]) >= 7
        kinds = {e["kind"] for e in body["solvers"]}
        assert {"claim_processor", "retriever", "verifier"} <= kinds


class TestCheck:
    def test_sync_happy_path(self, client):
        resp = client.post(
            "/v1/check",
            json={"text": "The sky is blue. Water is wet.", "inline_config": INLINE_CONFIG},
        )
        assert resp.status_code == 200
        state = resp.json()["state"]
        assert state["success"] is True
        assert len(state["claims"]) == 2
        assert state["document_verdict"]["label"] == "TRUE"

    def test_false_document(self, client):
        resp = client.post(
            "/v1/check",
            json={"text": "This statement is wrong.", "inline_config": INLINE_CONFIG},
        )
        assert resp.json()["state"]["document_verdict"]["label"] == "FALSE"

    def test_chain_mismatch_is_400(self, client):
        resp = client.post(
            "/v1/check",
            json={"text": "x", "inline_config": MISMATCHED_CONFIG},
        )
        assert resp.status_code == 400
        assert resp.json()["detail"]["type"] == "ChainMismatch"

    def test_schema_error_is_422(self, client):
        config = {"pipeline_id": "empty", "solvers": []}
        resp = client.post("/v1/check", json={"text": "x", "inline_config": config})
        assert resp.status_code == 422

    def test_async_lifecycle(self, client):
        resp = client.post(
            "/v1/check",
            json={"text": "Async fact.", "inline_config": INLINE_CONFIG, "sync": False},
        )
        assert resp.status_code == 202
        job_id = resp.json()["job_id"]
        job = poll_job(client, job_id)
        assert job["status"] == "done"
        assert job["result"]["state"]["success"] is True

    def test_unknown_job_404(self, client):
        assert client.get("/v1/jobs/nope").status_code == 404


class TestCheckerEval:
    def test_baseline_reaches_leaderboard(self, client):
        resp = client.post("/v1/checker-eval/submissions", json=baseline_submission_body())
        assert resp.status_code == 202
        job = poll_job(client, resp.json()["job_id"])
        assert job["status"] == "done"
        assert job["result"]["metrics"]["per_label"]["TRUE"]["recall"] == 1.0

        board = client.get("/v1/checker-eval/leaderboard").json()
        assert len(board["entries"]) == 1
        entry = board["entries"][0]
        assert entry["rank"] == 1
        assert entry["self_reported_badge"] == "self-reported"

    def test_unpublished_absent_from_leaderboard(self, client):
        body = baseline_submission_body(publish=False, submission_id="quiet-sub")
        job = poll_job(client, client.post("/v1/checker-eval/submissions", json=body).json()["job_id"])
        assert job["status"] == "done"
        board = client.get("/v1/checker-eval/leaderboard").json()
        assert board["entries"] == []

    def test_duplicate_submission_409(self, client):
        body = baseline_submission_body()
        first = client.post("/v1/checker-eval/submissions", json=body)
        assert first.status_code == 202
        poll_job(client, first.json()["job_id"])
        store = client.app.state.store
        before = store.all("submissions")
        dup = client.post("/v1/checker-eval/submissions", json=body)
        assert dup.status_code == 409
        assert store.all("submissions") == before  # store unchanged

    def test_bad_labels_422(self, client):
        body = baseline_submission_body()
        body["predictions"] = [{"id": body["predictions"][0]["id"], "label": "MAYBE"}]
        resp = client.post("/v1/checker-eval/submissions", json=body)
        assert resp.status_code == 422

    def test_unknown_ids_422(self, client):
        body = baseline_submission_body()
        body["predictions"] = body["predictions"] + [{"id": "stray#9", "label": "TRUE"}]
        resp = client.post("/v1/checker-eval/submissions", json=body)
        assert resp.status_code == 422
        assert any("stray#9" in d for d in resp.json()["detail"])


class TestLlmEval:
    def submission_body(self, publish=False):
        questions = load_factqa(fixture_path("factqa.jsonl"))
        snowball = [q for q in questions if q.source == "Snowball"]
        selfaware = [q for q in questions if q.source == "SelfAware"]
        responses = [
            {"question_id": q.id, "response": q.gold_answer.capitalize() + "."}
            for q in snowball
        ]
        responses += [
            {
                "question_id": q.id,
                "response": "The answer is 42." if q.answerable else "I don't know.",
            }
            for q in selfaware
        ]
        return {
            "submission_id": "llm-sub-1",
            "model_name": "fixture-model",
            "responses": responses,
            "families": ["snowball", "selfaware"],
            "publish": publish,
        }

    def test_submission_evaluates_and_reports(self, client, tmp_path):
        resp = client.post("/v1/llm-eval/submissions", json=self.submission_body())
        assert resp.status_code == 202
        job = poll_job(client, resp.json()["job_id"])
        assert job["status"] == "done"
        report = job["result"]["report"]
        assert report["families"]["snowball"]["full_set"]["accuracy"] == 1.0
        assert report["families"]["selfaware"]["f1"] == 1.0
        artifacts = job["result"]["artifacts"]
        assert artifacts["report_json"].endswith("report.json")

    def test_publish_populates_llm_leaderboard(self, client):
        body = self.submission_body(publish=True)
        poll_job(client, client.post("/v1/llm-eval/submissions", json=body).json()["job_id"])
        board = client.get("/v1/llm-eval/leaderboard").json()
        assert len(board["entries"]) == 1
        assert board["entries"][0]["model_name"] == "fixture-model"

    def test_unknown_question_id_422(self, client):
        body = self.submission_body()
        body["responses"].append({"question_id": "never-heard-of-it", "response": "x"})
        resp = client.post("/v1/llm-eval/submissions", json=body)
        assert resp.status_code == 422
        assert any("never-heard-of-it" in d for d in resp.json()["detail"])

    def test_duplicate_llm_submission_409(self, client):
        body = self.submission_body()
        first = client.post("/v1/llm-eval/submissions", json=body)
        poll_job(client, first.json()["job_id"])
        assert client.post("/v1/llm-eval/submissions", json=body).status_code == 409


class TestLeaderboardPurity:
    def test_consecutive_reads_identical(self, client):
        poll_job(
            client,
            client.post("/v1/checker-eval/submissions", json=baseline_submission_body()).json()["job_id"],
        )
        first = client.get("/v1/checker-eval/leaderboard").content
        second = client.get("/v1/checker-eval/leaderboard").content
        assert first == second


class TestCrashRestart:
    def test_restart_leaves_no_running_job(self, tmp_path):
        app = create_app(data_dir=tmp_path, registry=make_test_registry(), workers=1)
        store = app.state.store
        store.put("jobs", "wedged", {
            "job_id": "wedged", "kind": "check", "status": "running",
            "created_at": "t", "payload": {}, "result": None, "error": None,
        })
        app.state.jobs.shutdown()

        reborn = create_app(data_dir=tmp_path, registry=make_test_registry(), workers=1)
        with TestClient(reborn) as client:
            job = client.get("/v1/jobs/wedged").json()["job"]
            assert job["status"] == "failed"
            statuses = {j["status"] for j in reborn.state.store.all("jobs").values()}
            assert "running" not in statuses
        reborn.state.jobs.shutdown()


class TestDatasetDownloads:
    def test_questions_download(self, client):
        body = client.get("/v1/llm-eval/questions").json()
        assert body["schema_version"] == 1
        assert len(body["questions"]) == 100
        assert {"id", "question", "source"} <= set(body["questions"][0])

    def test_claims_download_has_no_gold_labels(self, client):
        body = client.get("/v1/checker-eval/claims").json()
        assert len(body["items"]) == 20
        for item in body["items"]:
            for claim in item.get("claims", []):
                assert set(claim) == {"id", "text"}
                assert "#" in claim["id"]
