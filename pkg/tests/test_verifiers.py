"""Verifiers: LLM label parsing, NLI majority vote, document aggregation."""

from collections import Counter
from itertools import combinations_with_replacement

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ofc.errors import EmptyEvidence, EmptyVerdicts, ParseError
from ofc.prompts import render_prompt
from ofc.types import DOCUMENT_VERDICT_ID, Claim, Evidence, Label, Stance, Verdict
from ofc.verifiers import (
    STANCE_TO_LABEL,
    LexicalOverlapNLI,
    aggregate_document,
    majority_stance_label,
    verify_llm,
    verify_nli,
)


def make_evidence(claim, texts):
    return [
        Evidence(claim_id=claim.id, text=t, source=f"doc{i}", rank=i + 1, score=1.0 / (i + 1))
        for i, t in enumerate(texts)
    ]


class ScriptedNLI:
    def __init__(self, stances):
        self.stances = list(stances)

    def stance(self, premise, hypothesis):
        return self.stances.pop(0)


class TestStanceMapping:
    def test_exact_three_entry_mapping(self):
        assert STANCE_TO_LABEL == {
            Stance.ENTAILMENT: Label.TRUE,
            Stance.CONTRADICTION: Label.FALSE,
            Stance.NEUTRAL: Label.NOT_ENOUGH_EVIDENCE,
        }

    def test_mapping_is_exhaustive_over_stances(self):
        assert set(STANCE_TO_LABEL) == set(Stance)


class TestVerifyLlm:
    def test_label_and_rationale(self, mock_gateway):
        claim = Claim(text="Water is wet.")
        evidence = make_evidence(claim, ["water wets surfaces"])
        prompt = render_prompt(
            "verify.v1.txt", claim=claim.text,
            evidence="[1] (doc0) water wets surfaces",
        )
        gateway = mock_gateway({prompt: "TRUE - supported by evidence 1"})
        verdict = verify_llm(claim, evidence, gateway)
        assert verdict.label is Label.TRUE
        assert "supported by evidence 1" in verdict.rationale
        assert verdict.evidence_ids == [evidence[0].id]

    def test_free_prose_is_parse_error(self, mock_gateway):
        claim = Claim(text="Water is wet.")
        prompt = render_prompt("verify.v1.txt", claim=claim.text, evidence="(no evidence retrieved)")
        gateway = mock_gateway({prompt: "Honestly this one is hard to say."})
        with pytest.raises(ParseError):
            verify_llm(claim, [], gateway)

    def test_empty_evidence_internal_knowledge_fallback(self, mock_gateway):
        claim = Claim(text="Zorblat-9 has two moons.")
        prompt = render_prompt("verify.v1.txt", claim=claim.text, evidence="(no evidence retrieved)")
        gateway = mock_gateway({prompt: "NOT_ENOUGH_EVIDENCE\nNothing retrieved and unknown to me."})
        verdict = verify_llm(claim, [], gateway)
        assert verdict.label is Label.NOT_ENOUGH_EVIDENCE
        assert verdict.evidence_ids == []


def brute_force_majority(stances):
    """Exhaustive majority with the documented tie rule, written directly."""
    counts = Counter(stances)
    best = max(counts.values())
    leaders = {s for s, c in counts.items() if c == best}
    if len(leaders) != 1:
        return Label.NOT_ENOUGH_EVIDENCE
    return {
        Stance.ENTAILMENT: Label.TRUE,
        Stance.CONTRADICTION: Label.FALSE,
        Stance.NEUTRAL: Label.NOT_ENOUGH_EVIDENCE,
    }[leaders.pop()]


class TestVerifyNli:
    def test_two_entail_one_contradict(self):
        claim = Claim(text="c")
        evidence = make_evidence(claim, ["e1", "e2", "e3"])
        nli = ScriptedNLI([Stance.ENTAILMENT, Stance.ENTAILMENT, Stance.CONTRADICTION])
        verdict = verify_nli(claim, evidence, nli)
        assert verdict.label is Label.TRUE
        assert verdict.confidence == pytest.approx(2 / 3)

    def test_singleton_contradiction(self):
        claim = Claim(text="c")
        verdict = verify_nli(claim, make_evidence(claim, ["e"]), ScriptedNLI([Stance.CONTRADICTION]))
        assert verdict.label is Label.FALSE
        assert verdict.confidence == 1.0

    def test_tie_abstains(self):
        claim = Claim(text="c")
        nli = ScriptedNLI([Stance.ENTAILMENT, Stance.CONTRADICTION])
        verdict = verify_nli(claim, make_evidence(claim, ["e1", "e2"]), nli)
        assert verdict.label is Label.NOT_ENOUGH_EVIDENCE

    def test_empty_evidence_rejected(self):
        with pytest.raises(EmptyEvidence):
            verify_nli(Claim(text="c"), [], ScriptedNLI([]))

    def test_exhaustive_multisets_up_to_five(self):
        # every stance multiset of size 1..5 against the brute-force computation
        checked = 0
        for size in range(1, 6):
            for combo in combinations_with_replacement(list(Stance), size):
                label, confidence = majority_stance_label(list(combo))
                assert label is brute_force_majority(combo), combo
                assert confidence == Counter(combo).most_common(1)[0][1] / size
                checked += 1
        assert checked == 55  # 3+6+10+15+21 multisets

    def test_order_does_not_matter(self):
        claim = Claim(text="c")
        stances = [Stance.ENTAILMENT, Stance.NEUTRAL, Stance.ENTAILMENT]
        for order in ([0, 1, 2], [2, 1, 0], [1, 2, 0]):
            nli = ScriptedNLI([stances[i] for i in order])
            verdict = verify_nli(claim, make_evidence(claim, ["a", "b", "c"]), nli)
            assert verdict.label is Label.TRUE


class TestLexicalOverlapStub:
    def test_entailment_on_containment(self):
        nli = LexicalOverlapNLI()
        assert nli.stance("the eiffel tower is in paris france", "the eiffel tower is in paris") is Stance.ENTAILMENT

    def test_contradiction_on_negation_mismatch(self):
        nli = LexicalOverlapNLI()
        assert nli.stance("the tower is not in paris", "the tower is in paris") is Stance.CONTRADICTION

    def test_neutral_on_low_overlap(self):
        nli = LexicalOverlapNLI()
        assert nli.stance("bananas are yellow", "the tower is in paris") is Stance.NEUTRAL

    def test_deterministic(self):
        nli = LexicalOverlapNLI()
        pairs = [("a b c", "a b c"), ("x y", "a b"), ("not a b", "a b")]
        first = [nli.stance(p, h) for p, h in pairs]
        second = [nli.stance(p, h) for p, h in pairs]
        assert first == second


def verdicts_of(labels):
    return [Verdict(claim_id=f"c{i}", label=label) for i, label in enumerate(labels)]


class TestAggregateDocument:
    def test_all_true(self):
        got = aggregate_document(verdicts_of([Label.TRUE, Label.TRUE]))
        assert got.label is Label.TRUE
        assert got.claim_id == DOCUMENT_VERDICT_ID

    def test_false_dominates(self):
        got = aggregate_document(verdicts_of([Label.TRUE, Label.FALSE, Label.NOT_ENOUGH_EVIDENCE]))
        assert got.label is Label.FALSE

    def test_only_opinion_abstains(self):
        got = aggregate_document(verdicts_of([Label.OPINION]))
        assert got.label is Label.NOT_ENOUGH_EVIDENCE

    def test_opinion_excluded_from_fold(self):
        got = aggregate_document(verdicts_of([Label.OPINION, Label.TRUE]))
        assert got.label is Label.TRUE

    def test_empty_rejected(self):
        with pytest.raises(EmptyVerdicts):
            aggregate_document([])

    @given(st.lists(st.sampled_from(list(Label)), min_size=1, max_size=8))
    def test_order_invariant_and_duplication_idempotent(self, labels):
        base = aggregate_document(verdicts_of(labels)).label
        assert aggregate_document(verdicts_of(list(reversed(labels)))).label is base
        assert aggregate_document(verdicts_of(labels + labels)).label is base


class FakeNliResponse:
    def __init__(self, status_code, payload):
        self.status_code = status_code
        self._payload = payload

    def json(self):
        return self._payload


class FakeNliSession:
    def __init__(self, responses):
        self.responses = list(responses)
        self.requests = []

    def post(self, url, json=None, timeout=None):
        self.requests.append(json)
        return self.responses.pop(0)


class TestHttpNLIClient:
    def test_wire_contract(self):
        from ofc.verifiers import HttpNLIClient

        session = FakeNliSession([FakeNliResponse(200, {"label": "entailment", "score": 0.93})])
        client = HttpNLIClient(url="http://nli.internal/stance", session=session)
        stance = client.stance("the tower is in paris", "the tower is in paris france")
        assert stance is Stance.ENTAILMENT
        sent = session.requests[0]
        assert set(sent) == {"premise", "hypothesis"}

    def test_unknown_label_is_nli_error(self):
        from ofc.errors import NLIError
        from ofc.verifiers import HttpNLIClient

        session = FakeNliSession([FakeNliResponse(200, {"label": "sideways", "score": 0.5})])
        client = HttpNLIClient(url="http://nli.internal/stance", session=session)
        with pytest.raises(NLIError):
            client.stance("p", "h")

    def test_http_error_is_nli_error(self):
        from ofc.errors import NLIError
        from ofc.verifiers import HttpNLIClient

        session = FakeNliSession([FakeNliResponse(500, {})])
        client = HttpNLIClient(url="http://nli.internal/stance", session=session)
        with pytest.raises(NLIError):
            client.stance("p", "h")
