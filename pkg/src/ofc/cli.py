"""Command-line front door.

Exit codes: 0 success, 1 usage or validation error, 2 pipeline ran but
ended with success=false. Every command writes machine output plus a
human-readable summary, and only ever writes under --out (serve also uses
OFC_DATA_DIR).
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click

from . import __version__
from .checker_eval import (
    evaluate_submission,
    load_checker_submission,
    run_baseline,
    save_submission,
)
from .datasets import load_factbench, load_factqa, load_submission
from .errors import DatasetValidationError, OfcError
from .gateway import gateway_from_env
from .llm_eval import FAMILIES, evaluate_llm_submission, write_report
from .pipeline import SolverRuntime, parse_config, run_pipeline, validate_chain
from .retrievers import build_index, load_corpus, save_index
from .solvers import build_default_registry
from .types import Claim, ClaimOrigin, FactCheckState


@click.group()
@click.version_option(version=__version__, prog_name="ofc")
def cli():
    """Fact-checking pipelines, LLM factuality evaluation, and checker benchmarking."""


def _make_runtime() -> SolverRuntime:
    gateway = None
    if os.environ.get("OFC_LLM_BASE_URL"):
        gateway = gateway_from_env()
    runtime = SolverRuntime(gateway=gateway)
    if gateway is not None:
        runtime.meter = gateway.meter
    return runtime


def _load_check_input(input_path: str | None, text: str | None) -> tuple[str, list[Claim]]:
    """Returns (document, pre-seeded claims). Claims come from a JSON input
    carrying a claims list (either plain strings or claim objects)."""
    if text is not None:
        return text, []
    raw = Path(input_path).read_text(encoding="utf-8")
    if input_path.endswith(".json"):
        payload = json.loads(raw)
        claims = []
        for entry in payload.get("claims", []):
            if isinstance(entry, str):
                claims.append(Claim(text=entry, origin=ClaimOrigin.PREANNOTATED))
            else:
                claims.append(Claim.from_dict(entry))
        return payload.get("document", ""), claims
    return raw, []


@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--input", "input_path", type=click.Path(exists=True))
@click.option("--text", "text")
@click.option("--start-at", type=int, default=0, show_default=True)
@click.option("--out", "out_dir", type=click.Path(), default="ofc-out", show_default=True)
def check(config_path, input_path, text, start_at, out_dir):
    """Run a fact-checking pipeline over a document."""
    if (input_path is None) == (text is None):
        raise click.UsageError("provide exactly one of --input or --text")
    config = parse_config(Path(config_path).read_text(encoding="utf-8"))
    registry = build_default_registry()
    validate_chain(config, registry)

    document, seeded_claims = _load_check_input(input_path, text)
    state = FactCheckState(document=document)
    if seeded_claims:
        state.seed_claims(seeded_claims)
    state = run_pipeline(state, config, registry, runtime=_make_runtime(), start_at=start_at)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "state.json").write_text(
        json.dumps(state.to_dict(include_trace=False), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    (out / "trace.json").write_text(
        json.dumps(
            {"trace": [t.to_dict() for t in state.trace], "total_cost_usd": str(state.total_cost)},
            indent=2,
            sort_keys=True,
        )
        + "\n",
        encoding="utf-8",
    )
    (out / "summary.md").write_text(_check_summary(state), encoding="utf-8")
    verdict = state.document_verdict.label.value if state.document_verdict else "(none)"
    click.echo(f"success={state.success} claims={len(state.claims)} document_verdict={verdict}")
    click.echo(f"wrote {out / 'state.json'}")
    return 0 if state.success else 2


def _check_summary(state: FactCheckState) -> str:
    lines = ["# Fact-check summary", ""]
    verdict = state.document_verdict.label.value if state.document_verdict else "(none)"
    lines.append(f"Document verdict: **{verdict}**; pipeline success: {state.success}")
    lines.append("")
    for claim in state.claims:
        v = state.verdicts.get(claim.id)
        label = v.label.value if v else "(unverified)"
        lines.append(f"- [{label}] {claim.text}")
        for ev in state.evidence.get(claim.id, [])[:3]:
            lines.append(f"    - evidence #{ev.rank} ({ev.source}): {ev.text[:120]}")
    lines.append("")
    lines.append("## Trace")
    for t in state.trace:
        status = "ok" if t.succeeded else f"FAILED ({t.note})"
        lines.append(
            f"- {t.solver_name}: {status}, {t.duration_ms:.1f} ms, "
            f"{t.tokens_in}/{t.tokens_out} tokens, {t.searches} searches, ${t.cost}"
        )
    lines.append("")
    return "\n".join(lines)


@cli.command("eval-llm")
@click.option("--questions", "questions_path", required=True, type=click.Path(exists=True))
@click.option("--responses", "responses_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--families", "families_csv")
@click.option("--pipeline", "pipeline_path", type=click.Path(exists=True))
def eval_llm(questions_path, responses_path, out_dir, families_csv, pipeline_path):
    """Evaluate a model-response submission and write the factuality report."""
    questions = load_factqa(questions_path)
    submission = load_submission(responses_path)
    families = None
    if families_csv:
        families = [f.strip().lower() for f in families_csv.split(",") if f.strip()]
        unknown = set(families) - set(FAMILIES)
        if unknown:
            raise click.UsageError(
                f"unknown families {sorted(unknown)}; valid: {', '.join(FAMILIES)}"
            )
    pipeline_config = None
    registry = None
    if pipeline_path:
        pipeline_config = parse_config(Path(pipeline_path).read_text(encoding="utf-8"))
        registry = build_default_registry()
        validate_chain(pipeline_config, registry)
    judge = gateway_from_env() if os.environ.get("OFC_LLM_BASE_URL") else None
    report, results = evaluate_llm_submission(
        questions,
        submission,
        families=families,
        pipeline_config=pipeline_config,
        registry=registry,
        make_runtime=_make_runtime if pipeline_config else None,
        judge_gateway=judge,
    )
    artifacts = write_report(report, results, out_dir)
    click.echo(f"evaluated {report.n_results} items for {report.model_name}")
    for entry in report.skipped_families:
        click.echo(f"skipped {entry['family']}: {entry['reason']}", err=True)
    click.echo(f"wrote {artifacts['report_json']}")
    return 0


@cli.command("eval-checker")
@click.option("--gold", "gold_path", required=True, type=click.Path(exists=True))
@click.option("--preds", "preds_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
def eval_checker(gold_path, preds_path, out_dir):
    """Score a fact-checker prediction file against gold labels."""
    gold = load_factbench(gold_path)
    submission = load_checker_submission(preds_path)
    metrics = evaluate_submission(submission, gold)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "metrics.json").write_text(
        json.dumps(
            {
                "system_name": submission.system_name,
                "dataset_id": submission.dataset_id,
                "total_latency_s": submission.total_latency_s,
                "total_cost_usd": submission.total_cost_usd,
                **metrics.to_dict(),
            },
            indent=2,
            sort_keys=True,
        )
        + "\n",
        encoding="utf-8",
    )
    lines = [f"# Checker evaluation: {submission.system_name}", ""]
    for label in ("TRUE", "FALSE"):
        m = metrics.per_label[label]
        lines.append(
            f"- label={label}: precision={m['precision']:.2f} recall={m['recall']:.2f} "
            f"f1={m['f1']:.2f} (support {m['support']})"
        )
    lines.append(f"- accuracy={metrics.accuracy:.2f}, macro-F1={metrics.macro_f1:.2f}")
    lines.append(f"- UNKNOWN golds excluded: {metrics.excluded_unknown_count}")
    lines.append("")
    (out / "metrics.md").write_text("\n".join(lines), encoding="utf-8")
    for label in ("TRUE", "FALSE"):
        m = metrics.per_label[label]
        click.echo(
            f"{label}: P={m['precision']:.2f} R={m['recall']:.2f} F1={m['f1']:.2f}"
        )
    click.echo(f"wrote {out / 'metrics.json'}")
    return 0


@cli.command()
@click.option("--gold", "gold_path", required=True, type=click.Path(exists=True))
@click.option("--kind", required=True, type=click.Choice(["random", "always_true", "always_false"]))
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path())
def baseline(gold_path, kind, seed, out_path):
    """Emit an analytic baseline prediction file (stdout unless --out)."""
    gold = load_factbench(gold_path)
    submission = run_baseline(gold, kind, seed=seed)
    if out_path:
        save_submission(submission, out_path)
        click.echo(f"wrote {out_path}", err=True)
    else:
        header = {
            "system_name": submission.system_name,
            "dataset_id": submission.dataset_id,
            "total_latency_s": submission.total_latency_s,
            "total_cost_usd": submission.total_cost_usd,
            "meta": submission.meta,
        }
        click.echo(json.dumps(header))
        for row in submission.predictions:
            click.echo(json.dumps(row))
    return 0


@cli.group()
def index():
    """Offline corpus index management."""


@index.command("build")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--window", type=int, default=256, show_default=True)
@click.option("--stride", type=int, default=128, show_default=True)
def index_build(corpus_path, out_path, window, stride):
    """Build a BM25 passage index from a line-delimited corpus file."""
    corpus = load_corpus(corpus_path)
    idx = build_index(corpus, passage_window=window, stride=stride)
    save_index(idx, out_path)
    click.echo(f"indexed {len(corpus)} documents into {idx.n_passages} passages")
    click.echo(f"wrote {out_path}")
    return 0


@cli.command()
@click.option("--addr", default="", help="host:port (default OFC_BIND_ADDR or 127.0.0.1:8000)")
def serve(addr):
    """Run the HTTP service (persists under OFC_DATA_DIR)."""
    from .server import main_serve

    main_serve(addr=addr)
    return 0


def main(argv=None) -> int:
    try:
        result = cli(args=argv, standalone_mode=False)
        return result if isinstance(result, int) else 0
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except DatasetValidationError as exc:
        for error in exc.errors:
            click.echo(f"validation: {error}", err=True)
        return 1
    except OfcError as exc:
        click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
