"""Domain types threaded through a fact-checking run.

A pipeline run owns exactly one FactCheckState. Solvers communicate through
``named_slots`` (name -> value, with a semantic type tag per slot) while also
filling the typed convenience fields (claims, evidence, verdicts) so the final
state is directly inspectable.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from decimal import Decimal
from enum import Enum
from typing import Any, Optional

DOCUMENT_VERDICT_ID = "DOCUMENT"


def claim_id_for(text: str) -> str:
    """Stable claim id: first 16 hex digits of SHA-256 over normalized text."""
    normalized = " ".join(text.split()).lower()
    return hashlib.sha256(normalized.encode("utf-8")).hexdigest()[:16]


class ClaimOrigin(str, Enum):
    SENTENCE_SPLIT = "sentence_split"
    LLM_DECOMPOSED = "llm_decomposed"
    DECONTEXTUALIZED = "decontextualized"
    PREANNOTATED = "preannotated"


class Label(str, Enum):
    TRUE = "TRUE"
    FALSE = "FALSE"
    NOT_ENOUGH_EVIDENCE = "NOT_ENOUGH_EVIDENCE"
    OPINION = "OPINION"


class Stance(str, Enum):
    ENTAILMENT = "entailment"
    CONTRADICTION = "contradiction"
    NEUTRAL = "neutral"


@dataclass
class Claim:
    text: str
    origin: ClaimOrigin = ClaimOrigin.LLM_DECOMPOSED
    source_sentence_index: Optional[int] = None
    id: str = ""

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("claim text must be non-empty")
        if not self.id:
            self.id = claim_id_for(self.text)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "text": self.text,
            "origin": self.origin.value,
            "source_sentence_index": self.source_sentence_index,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Claim":
        return cls(
            text=d["text"],
            origin=ClaimOrigin(d.get("origin", "llm_decomposed")),
            source_sentence_index=d.get("source_sentence_index"),
            id=d.get("id", ""),
        )


@dataclass
class Evidence:
    claim_id: str
    text: str
    source: str  # URL or corpus document id
    rank: int  # 1-based
    score: float

    @property
    def id(self) -> str:
        key = f"{self.claim_id}|{self.source}|{self.rank}|{self.text}"
        return hashlib.sha256(key.encode("utf-8")).hexdigest()[:12]

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "claim_id": self.claim_id,
            "text": self.text,
            "source": self.source,
            "rank": self.rank,
            "score": self.score,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Evidence":
        return cls(
            claim_id=d["claim_id"],
            text=d["text"],
            source=d["source"],
            rank=d["rank"],
            score=d["score"],
        )


@dataclass
class Verdict:
    claim_id: str  # or DOCUMENT_VERDICT_ID for the document-level verdict
    label: Label
    rationale: str = ""
    confidence: Optional[float] = None
    evidence_ids: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "claim_id": self.claim_id,
            "label": self.label.value,
            "rationale": self.rationale,
            "confidence": self.confidence,
            "evidence_ids": list(self.evidence_ids),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Verdict":
        return cls(
            claim_id=d["claim_id"],
            label=Label(d["label"]),
            rationale=d.get("rationale", ""),
            confidence=d.get("confidence"),
            evidence_ids=list(d.get("evidence_ids", [])),
        )


@dataclass
class SolverTrace:
    solver_name: str
    succeeded: bool
    duration_ms: float = 0.0
    tokens_in: int = 0
    tokens_out: int = 0
    searches: int = 0
    cost: Decimal = Decimal("0")
    note: Optional[str] = None

    def __post_init__(self):
        if self.duration_ms < 0:
            raise ValueError("duration must be >= 0")
        if self.cost < 0:
            raise ValueError("cost must be >= 0")

    def to_dict(self) -> dict:
        return {
            "solver_name": self.solver_name,
            "succeeded": self.succeeded,
            "duration_ms": self.duration_ms,
            "tokens_in": self.tokens_in,
            "tokens_out": self.tokens_out,
            "searches": self.searches,
            "cost_usd": str(self.cost),
            "note": self.note,
        }


@dataclass
class FactCheckState:
    """Mutable record carried through one pipeline run."""

    document: str = ""
    question: Optional[str] = None
    sentences: list[str] = field(default_factory=list)
    claims: list[Claim] = field(default_factory=list)
    evidence: dict[str, list[Evidence]] = field(default_factory=dict)
    verdicts: dict[str, Verdict] = field(default_factory=dict)
    document_verdict: Optional[Verdict] = None
    trace: list[SolverTrace] = field(default_factory=list)
    success: bool = True
    named_slots: dict[str, Any] = field(default_factory=dict)
    slot_types: dict[str, str] = field(default_factory=dict)
    total_cost: Decimal = Decimal("0")

    def set_slot(self, name: str, value: Any, semantic_type: str) -> None:
        self.named_slots[name] = value
        self.slot_types[name] = semantic_type

    def seed_claims(self, claims: list[Claim], slot_name: str = "claims") -> None:
        """Pre-seed claims so a run can start at the retrieval step."""
        self.claims = list(claims)
        self.set_slot(slot_name, list(claims), "claims")

    def check_invariants(self) -> None:
        claim_ids = {c.id for c in self.claims}
        for cid in self.evidence:
            if cid not in claim_ids:
                raise ValueError(f"evidence references unknown claim {cid!r}")
        for cid in self.verdicts:
            if cid not in claim_ids:
                raise ValueError(f"verdict references unknown claim {cid!r}")

    def to_dict(self, include_trace: bool = False) -> dict:
        d = {
            "document": self.document,
            "question": self.question,
            "sentences": list(self.sentences),
            "claims": [c.to_dict() for c in self.claims],
            "evidence": {
                cid: [e.to_dict() for e in evs] for cid, evs in self.evidence.items()
            },
            "verdicts": {cid: v.to_dict() for cid, v in self.verdicts.items()},
            "document_verdict": self.document_verdict.to_dict() if self.document_verdict else None,
            "success": self.success,
        }
        if include_trace:
            d["trace"] = [t.to_dict() for t in self.trace]
            d["total_cost_usd"] = str(self.total_cost)
        return d
