"""Checker evaluation: binary metrics, baselines, submissions, leaderboard."""

import pytest

from ofc.checker_eval import (
    CheckerSubmission,
    LeaderboardEntry,
    binary_metrics,
    evaluate_submission,
    gold_label_map,
    load_checker_submission,
    now_iso,
    rank_leaderboard,
    run_baseline,
    save_submission,
)
from ofc.datasets import FactBenchItem, GoldClaim, fixture_path, load_factbench
from ofc.errors import DuplicateId, UnresolvedId


def synthetic_gold(n_true: int, n_false: int, n_unknown: int = 0, source: str = "FacToolQA"):
    """One gold item per claim so the counts are exactly controllable."""
    items = []
    labels = ["TRUE"] * n_true + ["FALSE"] * n_false + ["UNKNOWN"] * n_unknown
    for i, label in enumerate(labels):
        items.append(
            FactBenchItem(
                id=f"g{i:04d}",
                question="q",
                response="r",
                source=source,
                response_gold_label=label if label != "UNKNOWN" else "TRUE",
                claims=[GoldClaim(text=f"claim {i}", gold_label=label)],
            )
        )
    return items


class TestBinaryMetrics:
    def test_always_true_on_factool_counts(self):
        # 177 TRUE / 56 FALSE, everything predicted TRUE, target TRUE
        gold = {f"c{i}": ("TRUE" if i < 177 else "FALSE") for i in range(233)}
        preds = {cid: "TRUE" for cid in gold}
        m = binary_metrics(preds, gold, "TRUE")
        assert round(m["precision"], 2) == 0.76
        assert m["recall"] == 1.0
        assert round(m["f1"], 2) == 0.86

    def test_always_false_on_factool_counts(self):
        gold = {f"c{i}": ("TRUE" if i < 177 else "FALSE") for i in range(233)}
        preds = {cid: "FALSE" for cid in gold}
        m = binary_metrics(preds, gold, "FALSE")
        assert round(m["precision"], 2) == 0.24
        assert m["recall"] == 1.0
        assert round(m["f1"], 2) == 0.39

    def test_perfect_predictions(self):
        gold = {"a": "TRUE", "b": "FALSE", "c": "TRUE"}
        m_true = binary_metrics(gold, gold, "TRUE")
        m_false = binary_metrics(gold, gold, "FALSE")
        for m in (m_true, m_false):
            assert (m["precision"], m["recall"], m["f1"]) == (1.0, 1.0, 1.0)

    def test_zero_denominators(self):
        gold = {"a": "TRUE"}
        preds = {"a": "TRUE"}
        m = binary_metrics(preds, gold, "FALSE")
        assert (m["precision"], m["recall"], m["f1"], m["support"]) == (0.0, 0.0, 0.0, 0)


class TestRunBaseline:
    def test_always_true_on_felm_counts(self):
        gold = synthetic_gold(385, 147, source="FELMWK")
        submission = run_baseline(gold, "always_true")
        report = evaluate_submission(submission, gold)
        assert round(report.per_label["TRUE"]["precision"], 2) == 0.72
        assert round(report.per_label["TRUE"]["f1"], 2) == 0.84

    def test_always_false_on_felm_counts(self):
        gold = synthetic_gold(385, 147, source="FELMWK")
        report = evaluate_submission(run_baseline(gold, "always_false"), gold)
        assert round(report.per_label["FALSE"]["precision"], 2) == 0.28
        assert round(report.per_label["FALSE"]["f1"], 2) == 0.43

    def test_random_deterministic_under_seed(self):
        gold = synthetic_gold(20, 10)
        first = run_baseline(gold, "random", seed=77)
        second = run_baseline(gold, "random", seed=77)
        assert first.predictions == second.predictions

    def test_metric_identities_for_always_true(self):
        gold = synthetic_gold(30, 10)
        report = evaluate_submission(run_baseline(gold, "always_true"), gold)
        assert report.per_label["TRUE"]["recall"] == 1.0
        assert report.per_label["TRUE"]["precision"] == 30 / 40  # prior(TRUE) exactly
        assert report.accuracy == 30 / 40

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            run_baseline(synthetic_gold(1, 1), "always_maybe")


class TestEvaluateSubmission:
    def test_self_consistency_with_baseline(self):
        gold = load_factbench(fixture_path("factbench.jsonl"))
        submission = run_baseline(gold, "always_true")
        direct = evaluate_submission(submission, gold)
        again = evaluate_submission(submission, gold)
        assert direct.to_dict() == again.to_dict()

    def test_missing_id_is_unresolved(self):
        gold = synthetic_gold(3, 1)
        submission = run_baseline(gold, "always_true")
        dropped = submission.predictions[1:]
        with pytest.raises(UnresolvedId) as exc:
            evaluate_submission(
                CheckerSubmission("s", "d", dropped), gold
            )
        assert exc.value.missing == [submission.predictions[0]["id"]]

    def test_unknown_id_is_unresolved(self):
        gold = synthetic_gold(2, 1)
        submission = run_baseline(gold, "always_true")
        submission.predictions.append({"id": "stray", "label": "TRUE"})
        with pytest.raises(UnresolvedId) as exc:
            evaluate_submission(submission, gold)
        assert exc.value.unknown == ["stray"]

    def test_duplicate_ids_rejected(self):
        gold = synthetic_gold(2, 1)
        submission = run_baseline(gold, "always_true")
        submission.predictions.append(dict(submission.predictions[0]))
        with pytest.raises(DuplicateId):
            evaluate_submission(submission, gold)

    def test_unknown_golds_excluded_and_counted(self):
        gold = synthetic_gold(4, 2, n_unknown=3)
        report = evaluate_submission(run_baseline(gold, "always_true"), gold)
        assert report.excluded_unknown_count == 3
        assert report.n_scored == 6

    def test_response_level_gold_without_claims(self):
        # document-level annotations: accuracy over the response gold label
        items = [
            FactBenchItem(
                id=f"h{i}", question="q", response="r", source="HaluEval",
                response_gold_label=("TRUE" if i % 2 == 0 else "FALSE"),
            )
            for i in range(4)
        ]
        submission = CheckerSubmission(
            "s", "halueval",
            predictions=[{"id": f"h{i}", "label": "TRUE"} for i in range(4)],
        )
        report = evaluate_submission(submission, items)
        assert report.accuracy == 0.5
        assert report.n_scored == 4

    def test_gold_map_mixes_levels(self):
        claim_item = synthetic_gold(2, 0)[0]
        response_item = FactBenchItem(
            id="resp", question="q", response="r", source="HaluEval",
            response_gold_label="FALSE",
        )
        gold = gold_label_map([claim_item, response_item])
        assert gold == {"g0000#0": "TRUE", "resp": "FALSE"}


class TestLeaderboard:
    def entry(self, sid, f1_true, f1_false, cost, latency, at=None):
        from ofc.checker_eval import MetricsReport

        metrics = MetricsReport(
            per_label={
                "TRUE": {"precision": 1, "recall": 1, "f1": f1_true, "support": 1},
                "FALSE": {"precision": 1, "recall": 1, "f1": f1_false, "support": 1},
            },
            accuracy=1.0,
            excluded_unknown_count=0,
            n_scored=2,
        )
        return LeaderboardEntry(
            submission_id=sid,
            system_name=sid,
            dataset_id="factbench",
            metrics=metrics,
            total_cost_usd=cost,
            total_latency_s=latency,
            submitted_at=at or now_iso(),
        )

    def test_equal_f1_cheaper_first(self):
        a = self.entry("a", 0.8, 0.4, cost=5.0, latency=10.0)
        b = self.entry("b", 0.8, 0.4, cost=2.0, latency=10.0)
        assert [e.submission_id for e in rank_leaderboard([a, b])] == ["b", "a"]

    def test_single_entry(self):
        only = self.entry("solo", 0.5, 0.5, 1.0, 1.0)
        assert rank_leaderboard([only]) == [only]

    def test_cost_profile_tiebreak(self):
        # equal-F1 systems: $14.7 / 0.49h outranks $39.9 / 7.67h
        fast_cheap = self.entry("factool-style", 0.7, 0.5, cost=14.7, latency=0.49 * 3600)
        slow_pricey = self.entry("finegrained-style", 0.7, 0.5, cost=39.9, latency=7.67 * 3600)
        ranked = rank_leaderboard([slow_pricey, fast_cheap])
        assert [e.submission_id for e in ranked] == ["factool-style", "finegrained-style"]

    def test_macro_f1_dominates(self):
        weak = self.entry("weak", 0.9, 0.1, cost=0.0, latency=0.0)
        strong = self.entry("strong", 0.7, 0.6, cost=100.0, latency=100.0)
        ranked = rank_leaderboard([weak, strong])
        assert [e.submission_id for e in ranked] == ["strong", "weak"]

    def test_dataset_filter(self):
        a = self.entry("a", 0.5, 0.5, 0, 0)
        b = self.entry("b", 0.5, 0.5, 0, 0)
        b.dataset_id = "other"
        assert rank_leaderboard([a, b], dataset_id="other") == [b]


class TestSubmissionFile:
    def test_round_trip(self, tmp_path):
        gold = load_factbench(fixture_path("factbench.jsonl"))
        submission = run_baseline(gold, "always_true")
        path = tmp_path / "sub.jsonl"
        save_submission(submission, path)
        loaded = load_checker_submission(path)
        assert loaded.system_name == submission.system_name
        assert loaded.predictions == submission.predictions
        report = evaluate_submission(loaded, gold)
        assert report.per_label["TRUE"]["recall"] == 1.0
