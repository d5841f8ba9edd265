"""Claim verification from evidence, and document-level aggregation.

Two verifiers are shipped: an LLM prompt whose first reply line must be one
of the four label tokens, and an NLI stance majority vote. Stances map to
factuality as entailment -> TRUE, contradiction -> FALSE, neutral ->
NOT_ENOUGH_EVIDENCE; a tied vote abstains to NOT_ENOUGH_EVIDENCE.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Optional, Protocol

import requests

from .errors import EmptyEvidence, EmptyVerdicts, NLIError, ParseError
from .gateway import ModelGateway
from .prompts import render_prompt
from .types import DOCUMENT_VERDICT_ID, Claim, Evidence, Label, Stance, Verdict

STANCE_TO_LABEL = {
    Stance.ENTAILMENT: Label.TRUE,
    Stance.CONTRADICTION: Label.FALSE,
    Stance.NEUTRAL: Label.NOT_ENOUGH_EVIDENCE,
}


def _format_evidence(evidence: list[Evidence]) -> str:
    if not evidence:
        return "(no evidence retrieved)"
    lines = []
    for i, ev in enumerate(evidence, start=1):
        lines.append(f"[{i}] ({ev.source}) {ev.text}")
    return "\n".join(lines)


def verify_llm(claim: Claim, evidence: list[Evidence], gateway: ModelGateway) -> Verdict:
    """Judge one claim with the LLM verifier prompt.

    The evidence list may be empty; the prompt then permits the model to fall
    back on its own knowledge.
    """
    prompt = render_prompt(
        "verify.v1.txt", claim=claim.text, evidence=_format_evidence(evidence)
    )
    reply = gateway.chat(prompt)
    lines = reply.text.strip().splitlines()
    first = lines[0].strip() if lines else ""
    token = first.split()[0].rstrip(".,:;!-—") if first.split() else ""
    try:
        label = Label(token)
    except ValueError:
        raise ParseError(f"first reply line is not a label token: {first[:80]!r}", raw=reply.text)
    remainder = first[len(token):].lstrip(" -—:.,")
    rationale_lines = ([remainder] if remainder else []) + [l.strip() for l in lines[1:]]
    return Verdict(
        claim_id=claim.id,
        label=label,
        rationale="\n".join(l for l in rationale_lines if l),
        evidence_ids=[ev.id for ev in evidence],
    )


class NLIClient(Protocol):
    def stance(self, premise: str, hypothesis: str) -> Stance: ...


@dataclass
class HttpNLIClient:
    """POSTs {premise, hypothesis} and expects {label, score} back."""

    url: str
    timeout_s: float = 15.0
    session: Optional[requests.Session] = None

    def __post_init__(self):
        if self.session is None:
            self.session = requests.Session()

    def stance(self, premise: str, hypothesis: str) -> Stance:
        try:
            resp = self.session.post(
                self.url,
                json={"premise": premise, "hypothesis": hypothesis},
                timeout=self.timeout_s,
            )
        except requests.RequestException as exc:
            raise NLIError(str(exc)) from exc
        if resp.status_code != 200:
            raise NLIError(f"NLI endpoint returned status {resp.status_code}")
        try:
            return Stance(resp.json()["label"])
        except (KeyError, ValueError) as exc:
            raise NLIError(f"NLI endpoint returned an unknown label: {exc}") from exc


_NEGATIONS = {"not", "no", "never", "none", "neither", "nor", "cannot"}


class LexicalOverlapNLI:
    """Deterministic stance stub for hermetic tests.

    High token overlap means entailment unless exactly one side negates, in
    which case contradiction; low overlap is neutral. Not a real NLI model.
    """

    def __init__(self, overlap_threshold: float = 0.75):
        self.overlap_threshold = overlap_threshold

    def stance(self, premise: str, hypothesis: str) -> Stance:
        premise_tokens = set(premise.lower().split())
        hypothesis_tokens = set(hypothesis.lower().split())
        content = hypothesis_tokens - _NEGATIONS
        if not content:
            return Stance.NEUTRAL
        overlap = len(content & (premise_tokens - _NEGATIONS)) / len(content)
        if overlap < self.overlap_threshold:
            return Stance.NEUTRAL
        premise_negated = bool(premise_tokens & _NEGATIONS)
        hypothesis_negated = bool(hypothesis_tokens & _NEGATIONS)
        if premise_negated != hypothesis_negated:
            return Stance.CONTRADICTION
        return Stance.ENTAILMENT


def majority_stance_label(stances: list[Stance]) -> tuple[Label, float]:
    """Majority vote over stances; ties abstain to NOT_ENOUGH_EVIDENCE.

    Returns the mapped label and the majority fraction as confidence.
    """
    if not stances:
        raise EmptyEvidence("majority vote needs at least one stance")
    counts = Counter(stances)
    top_count = max(counts.values())
    leaders = [s for s, c in counts.items() if c == top_count]
    confidence = top_count / len(stances)
    if len(leaders) > 1:
        return Label.NOT_ENOUGH_EVIDENCE, confidence
    return STANCE_TO_LABEL[leaders[0]], confidence


def verify_nli(claim: Claim, evidence: list[Evidence], nli: NLIClient) -> Verdict:
    """One stance per evidence passage, then majority vote."""
    if not evidence:
        raise EmptyEvidence("NLI verification requires at least one evidence passage")
    stances = [nli.stance(ev.text, claim.text) for ev in evidence]
    label, confidence = majority_stance_label(stances)
    return Verdict(
        claim_id=claim.id,
        label=label,
        confidence=confidence,
        rationale="majority stance over " + ", ".join(s.value for s in stances),
        evidence_ids=[ev.id for ev in evidence],
    )


def aggregate_document(verdicts: list[Verdict]) -> Verdict:
    """Fold claim verdicts into one document verdict.

    Severity order FALSE > NOT_ENOUGH_EVIDENCE > TRUE; OPINION claims are
    excluded from the fold, and a document with no checkable claim abstains.
    """
    if not verdicts:
        raise EmptyVerdicts("cannot aggregate an empty verdict list")
    checkable = [v for v in verdicts if v.label is not Label.OPINION]
    if not checkable:
        label = Label.NOT_ENOUGH_EVIDENCE
        rationale = "no checkable claim (all opinions)"
    elif any(v.label is Label.FALSE for v in checkable):
        label = Label.FALSE
        rationale = "at least one claim is false"
    elif any(v.label is Label.NOT_ENOUGH_EVIDENCE for v in checkable):
        label = Label.NOT_ENOUGH_EVIDENCE
        rationale = "no claim is false but at least one is unresolved"
    else:
        label = Label.TRUE
        rationale = "all checkable claims are true"
    return Verdict(claim_id=DOCUMENT_VERDICT_ID, label=label, rationale=rationale)
