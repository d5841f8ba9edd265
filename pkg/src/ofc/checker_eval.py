"""Scoring fact-checker predictions against gold labels.

Per-label precision/recall/F1 with TRUE and FALSE as target labels, plus
accuracy, analytic baselines (random coin, always-true, always-false), and
leaderboard ranking by macro-F1 with cost and latency tie-breaks. UNKNOWN
gold labels are excluded from binary metrics and the excluded count is
reported alongside.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from .datasets import FactBenchItem
from .errors import DuplicateId, MalformedRecord, UnresolvedId

BINARY_LABELS = ("TRUE", "FALSE")
BASELINE_KINDS = ("random", "always_true", "always_false")


@dataclass
class CheckerSubmission:
    system_name: str
    dataset_id: str
    predictions: list[dict]  # {id, label}
    total_latency_s: float = 0.0
    total_cost_usd: float = 0.0
    meta: str = ""

    def prediction_map(self) -> dict[str, str]:
        seen: dict[str, str] = {}
        duplicates = []
        for row in self.predictions:
            pid = row["id"]
            if pid in seen:
                duplicates.append(pid)
            seen[pid] = row["label"]
        if duplicates:
            raise DuplicateId(duplicates)
        return seen


@dataclass
class MetricsReport:
    per_label: dict[str, dict]  # label -> {precision, recall, f1, support}
    accuracy: float
    excluded_unknown_count: int
    n_scored: int

    @property
    def macro_f1(self) -> float:
        return (self.per_label["TRUE"]["f1"] + self.per_label["FALSE"]["f1"]) / 2.0

    def to_dict(self) -> dict:
        return {
            "per_label": self.per_label,
            "accuracy": self.accuracy,
            "macro_f1": self.macro_f1,
            "excluded_unknown_count": self.excluded_unknown_count,
            "n_scored": self.n_scored,
        }


def binary_metrics(
    predictions: dict[str, str], golds: dict[str, str], target_label: str
) -> dict:
    """P/R/F1/support for one target label over aligned id -> label maps.

    Zero denominators yield zero, per the usual convention.
    """
    tp = fp = fn = 0
    for pid, gold in golds.items():
        pred = predictions[pid]
        if pred == target_label and gold == target_label:
            tp += 1
        elif pred == target_label and gold != target_label:
            fp += 1
        elif pred != target_label and gold == target_label:
            fn += 1
    precision = tp / (tp + fp) if (tp + fp) else 0.0
    recall = tp / (tp + fn) if (tp + fn) else 0.0
    f1 = 2 * precision * recall / (precision + recall) if (precision + recall) else 0.0
    return {
        "precision": precision,
        "recall": recall,
        "f1": f1,
        "support": tp + fn,
    }


def gold_label_map(gold_items: list[FactBenchItem]) -> dict[str, str]:
    """id -> gold label over a mixed gold set.

    Claim-level items contribute one id per claim (``item_id#index``);
    items without claim annotations contribute their response-level label
    under the item id.
    """
    labels: dict[str, str] = {}
    for item in gold_items:
        labels.update(item.gold_ids())
    return labels


def evaluate_submission(
    submission: CheckerSubmission, gold_items: list[FactBenchItem]
) -> MetricsReport:
    """Validate id alignment, exclude UNKNOWN golds, and compute metrics."""
    predictions = submission.prediction_map()
    golds = gold_label_map(gold_items)
    unknown_ids = [pid for pid in predictions if pid not in golds]
    scored_golds = {gid: label for gid, label in golds.items() if label != "UNKNOWN"}
    missing_ids = [gid for gid in scored_golds if gid not in predictions]
    if unknown_ids or missing_ids:
        raise UnresolvedId(unknown=unknown_ids, missing=missing_ids)
    excluded = len(golds) - len(scored_golds)
    correct = sum(1 for gid, gold in scored_golds.items() if predictions[gid] == gold)
    return MetricsReport(
        per_label={
            label: binary_metrics(predictions, scored_golds, label) for label in BINARY_LABELS
        },
        accuracy=correct / len(scored_golds) if scored_golds else 0.0,
        excluded_unknown_count=excluded,
        n_scored=len(scored_golds),
    )


def run_baseline(
    gold_items: list[FactBenchItem],
    kind: str,
    seed: int = 0,
    dataset_id: str = "factbench",
) -> CheckerSubmission:
    """Analytic baseline predictions over every gold id.

    ``random`` flips a fair coin from a fixed seed; the always_* baselines
    are deterministic. Baselines report zero cost and latency.
    """
    if kind not in BASELINE_KINDS:
        raise ValueError(f"baseline kind must be one of {BASELINE_KINDS}")
    rng = random.Random(seed)
    predictions = []
    for gid in gold_label_map(gold_items):
        if kind == "always_true":
            label = "TRUE"
        elif kind == "always_false":
            label = "FALSE"
        else:
            label = "TRUE" if rng.random() < 0.5 else "FALSE"
        predictions.append({"id": gid, "label": label})
    name = kind if kind != "random" else f"random(seed={seed})"
    return CheckerSubmission(
        system_name=f"baseline:{name}",
        dataset_id=dataset_id,
        predictions=predictions,
        meta="analytic baseline; cost and latency are zero by construction",
    )


# -- leaderboard -----------------------------------------------------------------


@dataclass
class LeaderboardEntry:
    submission_id: str
    system_name: str
    dataset_id: str
    metrics: MetricsReport
    total_cost_usd: float
    total_latency_s: float
    submitted_at: str  # ISO-8601
    self_reported: bool = True

    def sort_key(self):
        return (-self.metrics.macro_f1, self.total_cost_usd, self.total_latency_s, self.submitted_at)

    def to_dict(self) -> dict:
        return {
            "submission_id": self.submission_id,
            "system_name": self.system_name,
            "dataset_id": self.dataset_id,
            "metrics": self.metrics.to_dict(),
            "total_cost_usd": self.total_cost_usd,
            "total_latency_s": self.total_latency_s,
            "submitted_at": self.submitted_at,
            "self_reported": self.self_reported,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LeaderboardEntry":
        metrics = MetricsReport(
            per_label=d["metrics"]["per_label"],
            accuracy=d["metrics"]["accuracy"],
            excluded_unknown_count=d["metrics"]["excluded_unknown_count"],
            n_scored=d["metrics"]["n_scored"],
        )
        return cls(
            submission_id=d["submission_id"],
            system_name=d["system_name"],
            dataset_id=d["dataset_id"],
            metrics=metrics,
            total_cost_usd=d["total_cost_usd"],
            total_latency_s=d["total_latency_s"],
            submitted_at=d["submitted_at"],
            self_reported=d.get("self_reported", True),
        )


def rank_leaderboard(entries: list[LeaderboardEntry], dataset_id: Optional[str] = None) -> list[LeaderboardEntry]:
    """Stable ordering: macro-F1 desc, then cost asc, latency asc, time asc."""
    pool = [e for e in entries if dataset_id is None or e.dataset_id == dataset_id]
    return sorted(pool, key=LeaderboardEntry.sort_key)


def now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


# -- submission file format --------------------------------------------------------


def save_submission(submission: CheckerSubmission, path: str | Path) -> None:
    """Header record then one {id, label} record per line."""
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(json.dumps({
            "system_name": submission.system_name,
            "dataset_id": submission.dataset_id,
            "total_latency_s": submission.total_latency_s,
            "total_cost_usd": submission.total_cost_usd,
            "meta": submission.meta,
        }) + "\n")
        for row in submission.predictions:
            fh.write(json.dumps({"id": row["id"], "label": row["label"]}) + "\n")


def load_checker_submission(path: str | Path) -> CheckerSubmission:
    with Path(path).open("r", encoding="utf-8") as fh:
        lines = [line.strip() for line in fh if line.strip()]
    if not lines:
        raise MalformedRecord(1, "empty submission file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise MalformedRecord(1, f"invalid JSON header: {exc.msg}")
    predictions = []
    for line_no, line in enumerate(lines[1:], start=2):
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(line_no, f"invalid JSON: {exc.msg}")
        if "id" not in row or "label" not in row:
            raise MalformedRecord(line_no, "prediction rows need id and label")
        if row["label"] not in BINARY_LABELS:
            raise MalformedRecord(line_no, f"label must be TRUE or FALSE, got {row['label']!r}")
        predictions.append({"id": str(row["id"]), "label": row["label"]})
    return CheckerSubmission(
        system_name=header.get("system_name", "unnamed"),
        dataset_id=header.get("dataset_id", "factbench"),
        predictions=predictions,
        total_latency_s=float(header.get("total_latency_s", 0.0)),
        total_cost_usd=float(header.get("total_cost_usd", 0.0)),
        meta=header.get("meta", ""),
    )
