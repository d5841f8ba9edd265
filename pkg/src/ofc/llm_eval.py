"""LLM factuality evaluation across the seven question-set families.

Yes/no and short-answer families are scored by exact matching, the
self-awareness family by abstention detection with unanswerable as the
positive class, the fresh-answer family by a strict few-shot judge, and the
free-form families by running a full fact-checking pipeline over each
response. The report is a pure fold over the stored per-item results:
per-family metrics, a per-domain accuracy table, a per-error-type breakdown,
and improvement advice keyed by the weakest error types.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional

from .datasets import FactQAItem, ResponseSubmission
from .errors import NoResults
from .gateway import ModelGateway
from .pipeline import PipelineConfig, SolverRegistry, SolverRuntime, run_pipeline
from .prompts import render_prompt
from .types import FactCheckState, Label

FAMILIES = (
    "snowball",
    "selfaware",
    "freshqa",
    "factoolqa",
    "felmwk",
    "factcheckbench",
    "factscorebio",
)
SOURCE_TO_FAMILY = {
    "Snowball": "snowball",
    "SelfAware": "selfaware",
    "FreshQA": "freshqa",
    "FacToolQA": "factoolqa",
    "FELMWK": "felmwk",
    "FactcheckBench": "factcheckbench",
    "FactScoreBio": "factscorebio",
}
FREEFORM_FAMILIES = ("factoolqa", "felmwk", "factcheckbench", "factscorebio")

ABSTENTION_PHRASES = (
    "i don't know",
    "i do not know",
    "cannot be determined",
    "can't be determined",
    "unanswerable",
    "no one knows",
    "impossible to know",
    "impossible to say",
    "cannot be answered",
    "unknown",
)

ADVICE_TEMPLATES = {
    "Type1": (
        "Knowledge gaps dominate the weakest results. Augment generation with "
        "retrieved external evidence at inference time, clean up the training "
        "corpus where feasible, and calibrate the model to abstain when a "
        "question falls outside what it reliably knows."
    ),
    "Type2": (
        "The model tends to commit to a premise before checking it. Instruct "
        "it to first decide whether the question's premise holds, and rephrase "
        "immediate yes/no prompts into step-by-step forms so an early wrong "
        "token does not snowball into a chain of false statements."
    ),
    "Type3": (
        "Questions whose answers move over time are the weak spot. Wire in "
        "retrieval of current information and condition answers on it, rather "
        "than trusting parameters frozen at training time."
    ),
}
ADVICE_THRESHOLD = 0.8


@dataclass
class EvalResult:
    question_id: str
    family: str
    verdict: str  # correct | incorrect | invalid
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "question_id": self.question_id,
            "family": self.family,
            "verdict": self.verdict,
            "detail": self.detail,
        }


# -- exact match -------------------------------------------------------------------

_WORD = re.compile(r"[a-z']+")


def _leading_yes_no(response: str) -> Optional[str]:
    match = _WORD.search(response.lower())
    if match is None:
        return None
    word = match.group()
    if word == "yes":
        return "yes"
    if word == "no":
        return "no"
    return None


def _normalize_answer(text: str) -> str:
    return " ".join(re.sub(r"[^\w\s]", " ", text.lower()).split())


def exact_match_eval(response: str, gold: str) -> str:
    """correct|incorrect by leading yes/no, or normalized substring match."""
    if not gold:
        raise ValueError("gold answer must be non-empty")
    gold_norm = gold.strip().lower()
    if gold_norm in ("yes", "no"):
        return "correct" if _leading_yes_no(response) == gold_norm else "incorrect"
    if _normalize_answer(gold) and _normalize_answer(gold) in _normalize_answer(response):
        return "correct"
    return "incorrect"


def snowball_eval(items: list[FactQAItem], results: dict[str, EvalResult]) -> dict:
    """Accuracy per snowball subset plus the pooled full-set accuracy."""
    per_subset: dict[str, dict] = {}
    total = correct = 0
    for item in items:
        result = results.get(item.id)
        if result is None:
            continue
        bucket = per_subset.setdefault(item.task or "unknown", {"n": 0, "correct": 0})
        bucket["n"] += 1
        total += 1
        if result.verdict == "correct":
            bucket["correct"] += 1
            correct += 1
    for bucket in per_subset.values():
        bucket["accuracy"] = bucket["correct"] / bucket["n"] if bucket["n"] else 0.0
    return {
        "per_subset": per_subset,
        "full_set": {"n": total, "correct": correct, "accuracy": correct / total if total else 0.0},
    }


# -- self-awareness ------------------------------------------------------------------


def detect_abstention(response: str, phrases: tuple[str, ...] = ABSTENTION_PHRASES) -> bool:
    lowered = response.lower()
    return any(phrase in lowered for phrase in phrases)


def selfaware_eval(pairs: list[tuple[bool, bool]]) -> dict:
    """Binary metrics over (gold_answerable, abstained) decisions.

    The positive class is unanswerable: a true positive is an abstention on
    a question whose gold marks it unanswerable.
    """
    tp = fp = fn = tn = 0
    for answerable, abstained in pairs:
        positive_gold = not answerable
        if abstained and positive_gold:
            tp += 1
        elif abstained and not positive_gold:
            fp += 1
        elif not abstained and positive_gold:
            fn += 1
        else:
            tn += 1
    precision = tp / (tp + fp) if (tp + fp) else 0.0
    recall = tp / (tp + fn) if (tp + fn) else 0.0
    f1 = 2 * precision * recall / (precision + recall) if (precision + recall) else 0.0
    n = tp + fp + fn + tn
    return {
        "precision": precision,
        "recall": recall,
        "f1": f1,
        "accuracy": (tp + tn) / n if n else 0.0,
        "n": n,
    }


# -- strict freshness judge ------------------------------------------------------------


def freshqa_strict_eval(item: FactQAItem, response: str, judge: ModelGateway) -> EvalResult:
    """Few-shot judge applied with the strict criterion; 3-way verdict.

    An unparseable judge reply counts as invalid, not as an error.
    """
    prompt = render_prompt(
        "freshqa_judge.v1.txt",
        question=item.question,
        gold_answer=item.gold_answer or "",
        response=response,
    )
    reply = judge.chat(prompt)
    lines = [l.strip() for l in reply.text.strip().splitlines() if l.strip()]
    first = lines[0].split()[0].rstrip(".,:;!").upper() if lines and lines[0].split() else ""
    verdict = {"CORRECT": "correct", "INCORRECT": "incorrect"}.get(first, "invalid")
    return EvalResult(
        question_id=item.id,
        family="freshqa",
        verdict=verdict,
        detail={"judge_first_line": lines[0] if lines else ""},
    )


def perc_valid(results: list[EvalResult]) -> float:
    if not results:
        return 0.0
    return sum(1 for r in results if r.verdict != "invalid") / len(results)


# -- free-form pipeline evaluation ------------------------------------------------------


def freeform_eval(
    items: list[FactQAItem],
    responses: dict[str, str],
    config: PipelineConfig,
    registry: SolverRegistry,
    make_runtime: Callable[[], SolverRuntime],
) -> list[EvalResult]:
    """Run the configured pipeline over each response; failures stay isolated.

    The per-response detail carries claim-label counts and the metered cost,
    so the aggregate free-form stats can be refolded from stored results.
    """
    results = []
    for item in items:
        response = responses.get(item.id)
        if response is None:
            continue
        family = SOURCE_TO_FAMILY[item.source]
        runtime = make_runtime()
        state = FactCheckState(document=response, question=item.question)
        state = run_pipeline(state, config, registry, runtime=runtime)
        if not state.success:
            note = state.trace[-1].note if state.trace else "pipeline produced no trace"
            results.append(
                EvalResult(item.id, family, "invalid", {"error": note})
            )
            continue
        labels = [v.label for v in state.verdicts.values()]
        document_label = state.document_verdict.label.value if state.document_verdict else None
        results.append(
            EvalResult(
                item.id,
                family,
                "correct" if document_label == Label.TRUE.value else "incorrect",
                {
                    "n_true": sum(1 for l in labels if l is Label.TRUE),
                    "n_false": sum(1 for l in labels if l is Label.FALSE),
                    "n_unknown": sum(
                        1 for l in labels if l in (Label.NOT_ENOUGH_EVIDENCE, Label.OPINION)
                    ),
                    "cost_usd": str(state.total_cost),
                    "document_label": document_label,
                },
            )
        )
    return results


def freeform_stats(results: list[EvalResult]) -> dict:
    """Exact claim-percentage arithmetic over free-form results."""
    n_true = sum(r.detail.get("n_true", 0) for r in results if r.verdict != "invalid")
    n_false = sum(r.detail.get("n_false", 0) for r in results if r.verdict != "invalid")
    n_unknown = sum(r.detail.get("n_unknown", 0) for r in results if r.verdict != "invalid")
    total = n_true + n_false + n_unknown
    est_cost = sum(
        (Decimal(r.detail["cost_usd"]) for r in results if "cost_usd" in r.detail),
        Decimal(0),
    )
    if total:
        percent_true = Fraction(100) * n_true / total
        percent_false = Fraction(100) * n_false / total
        percent_unknown = Fraction(100) * n_unknown / total
    else:
        percent_true = percent_false = percent_unknown = Fraction(0)
    return {
        "n_claims": total,
        "num_false_claims": n_false,
        "percent_true_claims": percent_true,
        "percent_false_claims": percent_false,
        "percent_unknown_claims": percent_unknown,
        "est_cost_usd": est_cost,
        "n_invalid_responses": sum(1 for r in results if r.verdict == "invalid"),
        "cost_is_estimated": True,
    }


# -- the report ---------------------------------------------------------------------------


@dataclass
class FactualityReport:
    model_name: str
    families: dict[str, dict]
    per_domain: dict[str, dict]
    per_error_type: dict[str, dict]
    freeform: Optional[dict]
    advice: list[dict]
    skipped_families: list[dict] = field(default_factory=list)
    n_results: int = 0

    def to_dict(self) -> dict:
        freeform = None
        if self.freeform is not None:
            freeform = dict(self.freeform)
            for key in ("percent_true_claims", "percent_false_claims", "percent_unknown_claims"):
                freeform[key] = float(freeform[key])
            freeform["est_cost_usd"] = str(freeform["est_cost_usd"])
        return {
            "model_name": self.model_name,
            "families": self.families,
            "per_domain": self.per_domain,
            "per_error_type": self.per_error_type,
            "freeform": freeform,
            "advice": self.advice,
            "skipped_families": self.skipped_families,
            "n_results": self.n_results,
        }


def build_report(
    model_name: str,
    items: list[FactQAItem],
    results: list[EvalResult],
    skipped_families: Optional[list[dict]] = None,
) -> FactualityReport:
    """Pure fold from stored per-item results to the multi-facet report."""
    if not results:
        raise NoResults("no evaluation results to report on")
    by_id = {item.id: item for item in items}
    by_qid = {r.question_id: r for r in results}

    families: dict[str, dict] = {}
    grouped: dict[str, list[EvalResult]] = {}
    for result in results:
        grouped.setdefault(result.family, []).append(result)

    if "snowball" in grouped:
        snowball_items = [by_id[r.question_id] for r in grouped["snowball"]]
        families["snowball"] = snowball_eval(snowball_items, by_qid)
    if "selfaware" in grouped:
        pairs = [
            (r.detail["answerable"], r.detail["abstained"]) for r in grouped["selfaware"]
        ]
        families["selfaware"] = selfaware_eval(pairs)
    if "freshqa" in grouped:
        fresh = grouped["freshqa"]
        valid = [r for r in fresh if r.verdict != "invalid"]
        families["freshqa"] = {
            "accuracy": (
                sum(1 for r in valid if r.verdict == "correct") / len(valid) if valid else 0.0
            ),
            "perc_valid": perc_valid(fresh),
            "n": len(fresh),
        }
    freeform_results = [r for r in results if r.family in FREEFORM_FAMILIES]
    freeform = freeform_stats(freeform_results) if freeform_results else None
    for family in FREEFORM_FAMILIES:
        if family in grouped:
            rs = grouped[family]
            valid = [r for r in rs if r.verdict != "invalid"]
            families[family] = {
                "n": len(rs),
                "n_invalid": len(rs) - len(valid),
                "document_accuracy": (
                    sum(1 for r in valid if r.verdict == "correct") / len(valid)
                    if valid
                    else 0.0
                ),
            }

    per_domain: dict[str, dict] = {}
    for result in results:
        item = by_id.get(result.question_id)
        domain = item.domain if item and item.domain else "(untagged)"
        bucket = per_domain.setdefault(domain, {"n": 0, "correct": 0, "invalid": 0})
        bucket["n"] += 1
        if result.verdict == "correct":
            bucket["correct"] += 1
        elif result.verdict == "invalid":
            bucket["invalid"] += 1
    for bucket in per_domain.values():
        scored = bucket["n"] - bucket["invalid"]
        bucket["accuracy"] = bucket["correct"] / scored if scored else 0.0

    per_error_type: dict[str, dict] = {}
    for result in results:
        item = by_id.get(result.question_id)
        if item is None or result.verdict == "invalid":
            continue
        for error_type in item.error_type:
            bucket = per_error_type.setdefault(error_type, {"n": 0, "correct": 0})
            bucket["n"] += 1
            if result.verdict == "correct":
                bucket["correct"] += 1
    for bucket in per_error_type.values():
        bucket["score"] = bucket["correct"] / bucket["n"] if bucket["n"] else 0.0

    weak = sorted(
        (
            (et, bucket["score"])
            for et, bucket in per_error_type.items()
            if bucket["score"] < ADVICE_THRESHOLD
        ),
        key=lambda pair: pair[1],
    )
    advice = [
        {"error_type": et, "score": score, "text": ADVICE_TEMPLATES[et]}
        for et, score in weak
    ]

    return FactualityReport(
        model_name=model_name,
        families=families,
        per_domain=per_domain,
        per_error_type=per_error_type,
        freeform=freeform,
        advice=advice,
        skipped_families=skipped_families or [],
        n_results=len(results),
    )


def write_report(report: FactualityReport, results: list[EvalResult], out_dir: str | Path) -> dict:
    """Materialize report.json, report.md, and the raw results."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report_json = out / "report.json"
    report_json.write_text(
        json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    results_path = out / "results.jsonl"
    with results_path.open("w", encoding="utf-8") as fh:
        for result in results:
            fh.write(json.dumps(result.to_dict(), sort_keys=True) + "\n")
    report_md = out / "report.md"
    report_md.write_text(render_report_markdown(report), encoding="utf-8")
    return {"report_json": str(report_json), "report_md": str(report_md), "results": str(results_path)}


def render_report_markdown(report: FactualityReport) -> str:
    lines = [f"# Factuality report: {report.model_name}", ""]
    lines.append(f"Evaluated items: {report.n_results}")
    lines.append("")
    lines.append("## Per-family metrics")
    for family, metrics in sorted(report.families.items()):
        rendered = ", ".join(
            f"{k}={v:.3f}" if isinstance(v, float) else f"{k}={v}"
            for k, v in metrics.items()
            if not isinstance(v, dict)
        )
        lines.append(f"- **{family}**: {rendered}")
        if "per_subset" in metrics:
            for subset, bucket in sorted(metrics["per_subset"].items()):
                lines.append(
                    f"  - {subset}: accuracy={bucket['accuracy']:.3f} ({bucket['correct']}/{bucket['n']})"
                )
    if report.freeform:
        lines.append("")
        lines.append("## Free-form responses")
        lines.append(
            f"- percent true claims: {float(report.freeform['percent_true_claims']):.1f}%"
        )
        lines.append(f"- false claims: {report.freeform['num_false_claims']}")
        lines.append(
            f"- estimated cost: ${report.freeform['est_cost_usd']} (token counts estimated)"
        )
    lines.append("")
    lines.append("## Per-domain accuracy")
    lines.append("| domain | n | correct | invalid | accuracy |")
    lines.append("|---|---|---|---|---|")
    for domain, bucket in sorted(report.per_domain.items()):
        lines.append(
            f"| {domain} | {bucket['n']} | {bucket['correct']} | {bucket['invalid']} | {bucket['accuracy']:.3f} |"
        )
    lines.append("")
    lines.append("## Per-error-type breakdown")
    for error_type, bucket in sorted(report.per_error_type.items()):
        lines.append(f"- {error_type}: score={bucket['score']:.3f} ({bucket['correct']}/{bucket['n']})")
    lines.append("")
    lines.append("## Advice")
    if report.advice:
        for entry in report.advice:
            lines.append(f"- ({entry['error_type']}, score {entry['score']:.2f}) {entry['text']}")
    else:
        lines.append("- No weak error types detected; nothing to advise.")
    if report.skipped_families:
        lines.append("")
        lines.append("## Skipped families")
        for entry in report.skipped_families:
            lines.append(f"- {entry['family']}: {entry['reason']}")
    lines.append("")
    return "\n".join(lines)


# -- orchestration ---------------------------------------------------------------------------


def evaluate_llm_submission(
    questions: list[FactQAItem],
    submission: ResponseSubmission,
    families: Optional[list[str]] = None,
    pipeline_config: Optional[PipelineConfig] = None,
    registry: Optional[SolverRegistry] = None,
    make_runtime: Optional[Callable[[], SolverRuntime]] = None,
    judge_gateway: Optional[ModelGateway] = None,
    abstention_phrases: tuple[str, ...] = ABSTENTION_PHRASES,
) -> tuple[FactualityReport, list[EvalResult]]:
    """Evaluate a response submission across the selected families."""
    submission.validate_against(questions)
    wanted = set(families) if families else set(FAMILIES)
    unknown = wanted - set(FAMILIES)
    if unknown:
        raise ValueError(f"unknown families: {sorted(unknown)}")
    responses = {row["question_id"]: row["response_text"] for row in submission.items}

    results: list[EvalResult] = []
    skipped: list[dict] = []
    by_family: dict[str, list[FactQAItem]] = {}
    for item in questions:
        family = SOURCE_TO_FAMILY[item.source]
        if family in wanted and item.id in responses:
            by_family.setdefault(family, []).append(item)

    for item in by_family.get("snowball", []):
        verdict = exact_match_eval(responses[item.id], item.gold_answer or "")
        results.append(
            EvalResult(item.id, "snowball", verdict, {"parsed": _leading_yes_no(responses[item.id])})
        )

    for item in by_family.get("selfaware", []):
        abstained = detect_abstention(responses[item.id], abstention_phrases)
        correct = abstained == (not item.answerable)
        results.append(
            EvalResult(
                item.id,
                "selfaware",
                "correct" if correct else "incorrect",
                {"abstained": abstained, "answerable": bool(item.answerable)},
            )
        )

    fresh_items = by_family.get("freshqa", [])
    if fresh_items:
        if judge_gateway is None:
            skipped.append({"family": "freshqa", "reason": "no judge gateway configured"})
        else:
            for item in fresh_items:
                results.append(freshqa_strict_eval(item, responses[item.id], judge_gateway))

    freeform_items = [
        item for family in FREEFORM_FAMILIES for item in by_family.get(family, [])
    ]
    if freeform_items:
        if pipeline_config is None or registry is None or make_runtime is None:
            for family in FREEFORM_FAMILIES:
                if by_family.get(family):
                    skipped.append(
                        {"family": family, "reason": "no fact-checking pipeline configured"}
                    )
        else:
            results.extend(
                freeform_eval(freeform_items, responses, pipeline_config, registry, make_runtime)
            )

    report = build_report(submission.model_name, questions, results, skipped_families=skipped)
    return report, results
