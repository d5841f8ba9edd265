"""HTTP service: pipeline runs, evaluation submissions, jobs, leaderboards.

All responses carry a stable ``schema_version`` field. Evaluation results
appear on a leaderboard only when the submitter set publish=true; background
work runs on the bounded job pool and is materialized to the file store
before a job reports done.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Any, Optional

import yaml
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import __version__
from .checker_eval import (
    CheckerSubmission,
    LeaderboardEntry,
    evaluate_submission,
    gold_label_map,
    now_iso,
    rank_leaderboard,
)
from .datasets import ResponseSubmission, fixture_path, load_factbench, load_factqa
from .errors import (
    ChainError,
    ConfigSyntaxError,
    DatasetValidationError,
    DuplicateId,
    SchemaError,
)
from .gateway import gateway_from_env
from .jobs import JobManager
from .llm_eval import FAMILIES, evaluate_llm_submission, write_report
from .pipeline import SolverRuntime, parse_config, run_pipeline, validate_chain
from .solvers import build_default_registry
from .store import Store
from .types import FactCheckState

SCHEMA_VERSION = 1


class CheckRequest(BaseModel):
    text: str
    config_id: Optional[str] = None
    inline_config: Optional[Any] = None
    sync: bool = True
    start_at: int = 0


class LlmEvalSubmission(BaseModel):
    submission_id: str
    model_name: str
    responses: list[dict]
    families: Optional[list[str]] = None
    publish: bool = False


class CheckerEvalSubmission(BaseModel):
    submission_id: str
    system_name: str
    dataset_id: str = "factbench"
    predictions: list[dict]
    total_latency_s: float = 0.0
    total_cost_usd: float = 0.0
    publish: bool = False
    meta: str = ""


def _default_runtime_factory():
    def make_runtime() -> SolverRuntime:
        gateway = None
        if os.environ.get("OFC_LLM_BASE_URL"):
            gateway = gateway_from_env()
        runtime = SolverRuntime(gateway=gateway)
        if gateway is not None:
            runtime.meter = gateway.meter
        return runtime

    return make_runtime


def create_app(
    data_dir: Optional[str | Path] = None,
    registry=None,
    make_runtime=None,
    workers: int = 4,
) -> FastAPI:
    data_dir = Path(data_dir or os.environ.get("OFC_DATA_DIR", ".ofc-data"))
    data_dir.mkdir(parents=True, exist_ok=True)
    registry = registry or build_default_registry()
    make_runtime = make_runtime or _default_runtime_factory()
    store = Store(data_dir / "store")

    def questions_path() -> Path:
        local = data_dir / "factqa.jsonl"
        return local if local.exists() else fixture_path("factqa.jsonl")

    def gold_path() -> Path:
        local = data_dir / "factbench.jsonl"
        return local if local.exists() else fixture_path("factbench.jsonl")

    def resolve_config(request: CheckRequest):
        if request.inline_config is not None:
            text = (
                request.inline_config
                if isinstance(request.inline_config, str)
                else yaml.safe_dump(request.inline_config)
            )
            return parse_config(text)
        if request.config_id:
            path = data_dir / "configs" / f"{request.config_id}.yaml"
            if not path.exists():
                raise HTTPException(404, detail=f"unknown config_id {request.config_id!r}")
            return parse_config(path.read_text(encoding="utf-8"))
        raise HTTPException(422, detail="provide config_id or inline_config")

    # -- job handlers -----------------------------------------------------------

    def handle_check(payload: dict) -> dict:
        config = parse_config(payload["config_text"])
        validate_chain(config, registry)
        state = FactCheckState(document=payload["text"])
        state = run_pipeline(
            state, config, registry, runtime=make_runtime(), start_at=payload.get("start_at", 0)
        )
        return {"state": state.to_dict(include_trace=True)}

    def handle_llm_eval(payload: dict) -> dict:
        record = store.get("submissions", payload["submission_id"])
        questions = load_factqa(questions_path())
        submission = ResponseSubmission(
            model_name=record["model_name"],
            items=[
                {"question_id": r["question_id"], "response_text": r.get("response", r.get("response_text", ""))}
                for r in record["responses"]
            ],
        )
        judge = None
        if os.environ.get("OFC_LLM_BASE_URL"):
            judge = gateway_from_env()
        pipeline_config = None
        freeform_config = data_dir / "configs" / "freeform.yaml"
        if freeform_config.exists():
            pipeline_config = parse_config(freeform_config.read_text(encoding="utf-8"))
        report, results = evaluate_llm_submission(
            questions,
            submission,
            families=record.get("families"),
            pipeline_config=pipeline_config,
            registry=registry if pipeline_config else None,
            make_runtime=make_runtime if pipeline_config else None,
            judge_gateway=judge,
        )
        job_dir = data_dir / "jobs" / payload["job_id"]
        artifacts = write_report(report, results, job_dir)
        if record.get("publish"):
            scored = [r for r in results if r.verdict != "invalid"]
            accuracy = (
                sum(1 for r in scored if r.verdict == "correct") / len(scored) if scored else 0.0
            )
            store.put(
                "leaderboard",
                f"llm:{payload['submission_id']}",
                {
                    "board": "llm",
                    "submission_id": payload["submission_id"],
                    "model_name": record["model_name"],
                    "overall_accuracy": accuracy,
                    "n_results": len(results),
                    "est_cost_usd": report.to_dict()["freeform"]["est_cost_usd"]
                    if report.freeform
                    else "0",
                    "submitted_at": record["submitted_at"],
                },
            )
        return {"report": report.to_dict(), "artifacts": artifacts}

    def handle_checker_eval(payload: dict) -> dict:
        record = store.get("submissions", payload["submission_id"])
        gold = load_factbench(gold_path())
        submission = CheckerSubmission(
            system_name=record["system_name"],
            dataset_id=record["dataset_id"],
            predictions=record["predictions"],
            total_latency_s=record["total_latency_s"],
            total_cost_usd=record["total_cost_usd"],
            meta=record.get("meta", ""),
        )
        metrics = evaluate_submission(submission, gold)
        if record.get("publish"):
            entry = LeaderboardEntry(
                submission_id=payload["submission_id"],
                system_name=record["system_name"],
                dataset_id=record["dataset_id"],
                metrics=metrics,
                total_cost_usd=record["total_cost_usd"],
                total_latency_s=record["total_latency_s"],
                submitted_at=record["submitted_at"],
            )
            store.put("leaderboard", f"checker:{payload['submission_id']}", {
                "board": "checker", **entry.to_dict(),
            })
        return {"metrics": metrics.to_dict()}

    jobs = JobManager(
        store,
        handlers={
            "check": handle_check,
            "llm_eval": handle_llm_eval,
            "checker_eval": handle_checker_eval,
        },
        workers=workers,
    )

    app = FastAPI(title="ofc", version=__version__)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=os.environ.get("OFC_CORS_ORIGINS", "*").split(","),
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.store = store
    app.state.jobs = jobs
    app.state.registry = registry
    app.state.data_dir = data_dir

    # -- endpoints ------------------------------------------------------------------

    @app.get("/v1/solvers")
    def list_solvers():
        return {"schema_version": SCHEMA_VERSION, "solvers": registry.listing()}

    @app.get("/v1/llm-eval/questions")
    def download_questions():
        questions = load_factqa(questions_path())
        return {
            "schema_version": SCHEMA_VERSION,
            "questions": [q.to_dict() for q in questions],
        }

    @app.get("/v1/checker-eval/claims")
    def download_claims():
        # the material a checker must label; gold labels stay server-side
        gold = load_factbench(gold_path())
        items = []
        for item in gold:
            entry = {"id": item.id, "question": item.question, "response": item.response}
            if item.claims:
                entry["claims"] = [
                    {"id": item.claim_id(i), "text": c.text} for i, c in enumerate(item.claims)
                ]
            items.append(entry)
        return {"schema_version": SCHEMA_VERSION, "items": items}

    @app.post("/v1/check")
    def check(request: CheckRequest):
        try:
            config = resolve_config(request)
            validate_chain(config, registry)
        except (ConfigSyntaxError, SchemaError) as exc:
            raise HTTPException(422, detail=str(exc))
        except ChainError as exc:
            raise HTTPException(
                400,
                detail={"type": type(exc).__name__, "message": str(exc)},
            )
        config_text = yaml.safe_dump(
            {
                "pipeline_id": config.pipeline_id,
                "solvers": [
                    {
                        "name": b.name,
                        "kind": b.kind,
                        "implementation": b.implementation,
                        "input_name": b.input_name,
                        "output_name": b.output_name,
                        "params": b.params,
                    }
                    for b in config.solvers
                ],
            }
        )
        if request.sync:
            result = handle_check(
                {"text": request.text, "config_text": config_text, "start_at": request.start_at}
            )
            return {"schema_version": SCHEMA_VERSION, **result}
        job_id = jobs.submit(
            "check",
            {"text": request.text, "config_text": config_text, "start_at": request.start_at},
        )
        return _accepted(job_id)

    @app.get("/v1/jobs/{job_id}")
    def get_job(job_id: str):
        job = jobs.get(job_id)
        if job is None:
            raise HTTPException(404, detail=f"unknown job {job_id!r}")
        return {"schema_version": SCHEMA_VERSION, "job": job}

    @app.post("/v1/llm-eval/submissions")
    def submit_llm_eval(submission: LlmEvalSubmission):
        if store.get("submissions", submission.submission_id) is not None:
            raise HTTPException(409, detail=f"submission {submission.submission_id!r} already exists")
        if submission.families:
            unknown = set(submission.families) - set(FAMILIES)
            if unknown:
                raise HTTPException(422, detail=[f"unknown family {f!r}" for f in sorted(unknown)])
        questions = load_factqa(questions_path())
        probe = ResponseSubmission(
            model_name=submission.model_name,
            items=[
                {"question_id": r.get("question_id", ""), "response_text": r.get("response", "")}
                for r in submission.responses
            ],
        )
        try:
            probe.validate_against(questions)
        except DatasetValidationError as exc:
            raise HTTPException(422, detail=[str(e) for e in exc.errors])
        store.put(
            "submissions",
            submission.submission_id,
            {
                "kind": "llm_eval",
                "submission_id": submission.submission_id,
                "model_name": submission.model_name,
                "responses": submission.responses,
                "families": submission.families,
                "publish": submission.publish,
                "submitted_at": now_iso(),
            },
        )
        job_id = jobs.submit("llm_eval", {"submission_id": submission.submission_id})
        return _accepted(job_id)

    @app.post("/v1/checker-eval/submissions")
    def submit_checker_eval(submission: CheckerEvalSubmission):
        if store.get("submissions", submission.submission_id) is not None:
            raise HTTPException(409, detail=f"submission {submission.submission_id!r} already exists")
        problems = [
            f"prediction {i}: label must be TRUE or FALSE"
            for i, row in enumerate(submission.predictions)
            if row.get("label") not in ("TRUE", "FALSE")
        ]
        gold = load_factbench(gold_path())
        try:
            CheckerSubmission(
                system_name=submission.system_name,
                dataset_id=submission.dataset_id,
                predictions=submission.predictions,
            ).prediction_map()
        except DuplicateId as exc:
            problems.append(str(exc))
        if not problems:
            known = gold_label_map(gold)
            submitted = {row["id"] for row in submission.predictions}
            stray = sorted(submitted - set(known))
            missing = sorted(
                gid for gid, label in known.items()
                if label != "UNKNOWN" and gid not in submitted
            )
            if stray:
                problems.append(f"unknown ids: {', '.join(stray[:10])}")
            if missing:
                problems.append(f"missing ids: {', '.join(missing[:10])}")
        if problems:
            raise HTTPException(422, detail=problems)
        store.put(
            "submissions",
            submission.submission_id,
            {
                "kind": "checker_eval",
                "submission_id": submission.submission_id,
                "system_name": submission.system_name,
                "dataset_id": submission.dataset_id,
                "predictions": submission.predictions,
                "total_latency_s": submission.total_latency_s,
                "total_cost_usd": submission.total_cost_usd,
                "publish": submission.publish,
                "meta": submission.meta,
                "submitted_at": now_iso(),
            },
        )
        job_id = jobs.submit("checker_eval", {"submission_id": submission.submission_id})
        return _accepted(job_id)

    @app.get("/v1/checker-eval/leaderboard")
    def checker_leaderboard(dataset_id: Optional[str] = None):
        entries = [
            LeaderboardEntry.from_dict(record)
            for record in store.all("leaderboard").values()
            if record.get("board") == "checker"
        ]
        ranked = rank_leaderboard(entries, dataset_id=dataset_id)
        return {
            "schema_version": SCHEMA_VERSION,
            "entries": [
                {"rank": i + 1, "self_reported_badge": "self-reported", **e.to_dict()}
                for i, e in enumerate(ranked)
            ],
        }

    @app.get("/v1/llm-eval/leaderboard")
    def llm_leaderboard():
        entries = [
            record
            for record in store.all("leaderboard").values()
            if record.get("board") == "llm"
        ]
        entries.sort(key=lambda r: (-r.get("overall_accuracy", 0.0), r.get("submitted_at", "")))
        return {
            "schema_version": SCHEMA_VERSION,
            "entries": [{"rank": i + 1, **e} for i, e in enumerate(entries)],
        }

    def _accepted(job_id: str) -> JSONResponse:
        return JSONResponse(
            status_code=202,
            content={"schema_version": SCHEMA_VERSION, "job_id": job_id},
        )

    return app


def main_serve(addr: str = "", data_dir: Optional[str] = None) -> None:
    """Entry point used by the CLI serve command."""
    import uvicorn

    bind = addr or os.environ.get("OFC_BIND_ADDR", "127.0.0.1:8000")
    host, _, port = bind.partition(":")
    app = create_app(data_dir=data_dir)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000))
