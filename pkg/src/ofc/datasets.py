"""Schemas, ingestion, and validation for the question set and the annotated
claim benchmark, plus the desk-scale fixtures shipped in the same formats.

Both files are UTF-8 line-delimited JSON, one record per line. Per-record
problems are collected with their line numbers and reported together.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

from .errors import (
    DatasetValidationError,
    InvariantViolation,
    MalformedRecord,
    ParseError,
    RecordError,
)
from .gateway import ModelGateway

FACTQA_SOURCES = (
    "Snowball",
    "SelfAware",
    "FreshQA",
    "FacToolQA",
    "FELMWK",
    "FactcheckBench",
    "FactScoreBio",
)
FACTBENCH_SOURCES = ("FacToolQA", "FELMWK", "FactcheckBench", "HaluEval")
ERROR_TYPES = ("Type1", "Type2", "Type3")
ANSWER_VOLATILITY = ("never", "slow", "fast", "false_premise")
GOLD_CLAIM_LABELS = ("TRUE", "FALSE", "UNKNOWN")
SNOWBALL_TASKS = ("primality", "senator_search", "graph_connectivity")


@dataclass
class FactQAItem:
    id: str
    question: str
    source: str
    domain: str = ""
    topic: str = ""
    ability: str = ""
    task: str = ""
    error_type: list[str] = field(default_factory=list)
    gold_answer: Optional[str] = None
    answerable: Optional[bool] = None
    answer_volatility: Optional[str] = None

    def validate(self) -> None:
        if not self.id:
            raise ValueError("id is required")
        if not self.question:
            raise ValueError("question is required")
        if self.source not in FACTQA_SOURCES:
            raise ValueError(f"source {self.source!r} not one of {FACTQA_SOURCES}")
        for et in self.error_type:
            if et not in ERROR_TYPES:
                raise ValueError(f"error_type {et!r} not one of {ERROR_TYPES}")
        if self.source == "Snowball" and self.gold_answer not in ("yes", "no"):
            raise ValueError("Snowball items need gold_answer yes/no")
        if self.source == "SelfAware" and self.answerable is None:
            raise ValueError("SelfAware items need answerable")
        if self.source == "FreshQA" and self.answer_volatility not in ANSWER_VOLATILITY:
            raise ValueError("FreshQA items need answer_volatility")

    def to_dict(self) -> dict:
        d = {
            "id": self.id,
            "question": self.question,
            "source": self.source,
            "domain": self.domain,
            "topic": self.topic,
            "ability": self.ability,
            "task": self.task,
            "error_type": list(self.error_type),
        }
        if self.gold_answer is not None:
            d["gold_answer"] = self.gold_answer
        if self.answerable is not None:
            d["answerable"] = self.answerable
        if self.answer_volatility is not None:
            d["answer_volatility"] = self.answer_volatility
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FactQAItem":
        item = cls(
            id=str(d.get("id", "")),
            question=d.get("question", ""),
            source=d.get("source", ""),
            domain=d.get("domain", ""),
            topic=d.get("topic", ""),
            ability=d.get("ability", ""),
            task=d.get("task", ""),
            error_type=list(d.get("error_type", [])),
            gold_answer=d.get("gold_answer"),
            answerable=d.get("answerable"),
            answer_volatility=d.get("answer_volatility"),
        )
        item.validate()
        return item


@dataclass
class GoldClaim:
    text: str
    gold_label: str

    def validate(self) -> None:
        if not self.text:
            raise ValueError("claim text is required")
        if self.gold_label not in GOLD_CLAIM_LABELS:
            raise ValueError(f"gold_label {self.gold_label!r} not one of {GOLD_CLAIM_LABELS}")


@dataclass
class FactBenchItem:
    id: str
    question: str
    response: str
    source: str
    response_gold_label: str
    claims: list[GoldClaim] = field(default_factory=list)
    false_segments: Optional[list[list[int]]] = None

    def validate(self) -> None:
        if not self.id:
            raise ValueError("id is required")
        if self.source not in FACTBENCH_SOURCES:
            raise ValueError(f"source {self.source!r} not one of {FACTBENCH_SOURCES}")
        if self.response_gold_label not in ("TRUE", "FALSE"):
            raise ValueError("response_gold_label must be TRUE or FALSE")
        if self.source == "HaluEval":
            if self.claims:
                raise ValueError("HaluEval items carry no claim-level labels")
        elif not self.claims:
            raise ValueError(f"{self.source} items need at least one claim")
        for claim in self.claims:
            claim.validate()

    def claim_id(self, index: int) -> str:
        """Stable gold id for claim #index of this item."""
        return f"{self.id}#{index}"

    def gold_ids(self) -> dict[str, str]:
        """id -> gold label; claim-level when claims exist, else response-level."""
        if self.claims:
            return {self.claim_id(i): c.gold_label for i, c in enumerate(self.claims)}
        return {self.id: self.response_gold_label}

    def to_dict(self) -> dict:
        d = {
            "id": self.id,
            "question": self.question,
            "response": self.response,
            "source": self.source,
            "response_gold_label": self.response_gold_label,
            "claims": [{"text": c.text, "gold_label": c.gold_label} for c in self.claims],
        }
        if self.false_segments is not None:
            d["false_segments"] = [list(span) for span in self.false_segments]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FactBenchItem":
        item = cls(
            id=str(d.get("id", "")),
            question=d.get("question", ""),
            response=d.get("response", ""),
            source=d.get("source", ""),
            response_gold_label=d.get("response_gold_label", ""),
            claims=[GoldClaim(c.get("text", ""), c.get("gold_label", "")) for c in d.get("claims", [])],
            false_segments=d.get("false_segments"),
        )
        item.validate()
        return item


@dataclass
class ResponseSubmission:
    model_name: str
    items: list[dict]  # {question_id, response_text}

    def validate_against(self, questions: list[FactQAItem]) -> None:
        known = {q.id for q in questions}
        seen: set[str] = set()
        problems = []
        for i, entry in enumerate(self.items):
            qid = entry.get("question_id", "")
            if qid in seen:
                problems.append(RecordError(i + 1, f"duplicate question_id {qid!r}"))
            seen.add(qid)
            if qid not in known:
                problems.append(RecordError(i + 1, f"unknown question_id {qid!r}"))
        if problems:
            raise DatasetValidationError(problems)


def _load_jsonl(path: str | Path, parse_record) -> list:
    items = []
    errors: list[RecordError] = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                errors.append(MalformedRecord(line_no, f"invalid JSON: {exc.msg}"))
                continue
            if not isinstance(record, dict):
                errors.append(MalformedRecord(line_no, "record must be a JSON object"))
                continue
            try:
                items.append(parse_record(record))
            except ValueError as exc:
                errors.append(InvariantViolation(line_no, str(exc)))
    if errors:
        raise DatasetValidationError(errors)
    return items


def load_factqa(path: str | Path) -> list[FactQAItem]:
    return _load_jsonl(path, FactQAItem.from_dict)


def load_factbench(path: str | Path) -> list[FactBenchItem]:
    return _load_jsonl(path, FactBenchItem.from_dict)


def save_factqa(items: list[FactQAItem], path: str | Path) -> None:
    _save_jsonl([i.to_dict() for i in items], path)


def save_factbench(items: list[FactBenchItem], path: str | Path) -> None:
    _save_jsonl([i.to_dict() for i in items], path)


def _save_jsonl(records: list[dict], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def load_submission(path: str | Path) -> ResponseSubmission:
    """Submission file: header {model_name}, then {question_id, response} lines."""
    records = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise DatasetValidationError([MalformedRecord(line_no, f"invalid JSON: {exc.msg}")])
    if not records:
        raise DatasetValidationError([MalformedRecord(1, "empty submission file")])
    header, rows = records[0], records[1:]
    model_name = header.get("model_name", "")
    if not model_name:
        raise DatasetValidationError([MalformedRecord(1, "header must carry model_name")])
    items = []
    for i, row in enumerate(rows, start=2):
        if "question_id" not in row or ("response" not in row and "response_text" not in row):
            raise DatasetValidationError(
                [MalformedRecord(i, "rows need question_id and response")]
            )
        items.append(
            {
                "question_id": str(row["question_id"]),
                "response_text": row.get("response", row.get("response_text", "")),
            }
        )
    return ResponseSubmission(model_name=model_name, items=items)


def dataset_summary(items: list) -> dict:
    """Per-source counts of items, claims, and gold labels, plus totals."""
    per_source: dict[str, dict] = {}
    for item in items:
        bucket = per_source.setdefault(
            item.source, {"items": 0, "claims": 0, "labels": {label: 0 for label in GOLD_CLAIM_LABELS}}
        )
        bucket["items"] += 1
        for claim in getattr(item, "claims", []) or []:
            bucket["claims"] += 1
            bucket["labels"][claim.gold_label] += 1
    total = {"items": 0, "claims": 0, "labels": {label: 0 for label in GOLD_CLAIM_LABELS}}
    for bucket in per_source.values():
        total["items"] += bucket["items"]
        total["claims"] += bucket["claims"]
        for label in GOLD_CLAIM_LABELS:
            total["labels"][label] += bucket["labels"][label]
    return {"per_source": per_source, "total": total}


DOMAIN_TOPIC_PROMPT = """Identify the knowledge domain and the specific topic
of the question below, using the reference response for context.

Output format (strict): reply with exactly two lines,
DOMAIN: <domain>
TOPIC: <topic>

Question:
{question}

Reference response:
{response}
"""


def tag_domain_topic(question: str, reference_response: str, gateway: ModelGateway) -> dict:
    """Ask the model for a {domain, topic} pair; both must be non-empty."""
    prompt = DOMAIN_TOPIC_PROMPT.format(question=question, response=reference_response)
    reply = gateway.chat(prompt)
    domain = topic = ""
    for line in reply.text.strip().splitlines():
        line = line.strip()
        if line.upper().startswith("DOMAIN:"):
            domain = line[len("DOMAIN:"):].strip()
        elif line.upper().startswith("TOPIC:"):
            topic = line[len("TOPIC:"):].strip()
    if not domain or not topic:
        raise ParseError("reply did not contain DOMAIN and TOPIC lines", raw=reply.text)
    return {"domain": domain, "topic": topic}


def tag_item(item: FactQAItem, reference_response: str, gateway: ModelGateway) -> FactQAItem:
    """Fill in domain/topic unless the item is already tagged (then no-op)."""
    if item.domain and item.topic:
        return item
    tags = tag_domain_topic(item.question, reference_response, gateway)
    item.domain = tags["domain"]
    item.topic = tags["topic"]
    return item


def fixture_path(name: str) -> Path:
    """Path of a fixture dataset shipped inside the package."""
    return Path(str(resources.files("ofc").joinpath("data", name)))
