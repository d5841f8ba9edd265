"""Turning documents into context-independent atomic claims.

Three strategies are provided: whole-document decomposition, per-sentence
decomposition (split first, then decompose each sentence), and
decontextualization of individual claims against their source document.
The sentence splitter is rule based so the test suite stays hermetic.
"""

from __future__ import annotations

import re

from .errors import ParseError
from .gateway import ModelGateway
from .prompts import render_prompt
from .types import Claim, ClaimOrigin

# Words whose trailing period does not end a sentence. Lowercase, no final dot.
_ABBREVIATIONS = {
    "dr", "mr", "mrs", "ms", "prof", "sr", "jr", "st", "mt", "rev", "sen",
    "rep", "gen", "gov", "capt", "col", "sgt", "fr", "pres",
    "vs", "etc", "ca", "approx", "no", "dept", "est", "fig", "vol",
    "inc", "ltd", "co", "corp",
    "e.g", "i.e", "u.s", "u.k", "a.m", "p.m", "u.n", "d.c", "b.c", "a.d",
}

_TERMINATOR = re.compile(r"[.!?]+[\"'”’)\]]*")
_PARAGRAPH_SPLIT = re.compile(r"\n\s*\n")


def split_sentences(document: str) -> list[str]:
    """Rule-based sentence segmentation.

    Blank lines always start a new sentence; within a paragraph, a run of
    terminal punctuation ends a sentence unless it closes a known
    abbreviation, a single initial, or a number.
    """
    sentences: list[str] = []
    for paragraph in _PARAGRAPH_SPLIT.split(document):
        paragraph = paragraph.strip()
        if paragraph:
            sentences.extend(_split_paragraph(paragraph))
    return sentences


def _split_paragraph(paragraph: str) -> list[str]:
    sentences = []
    start = 0
    for match in _TERMINATOR.finditer(paragraph):
        end = match.end()
        if end < len(paragraph) and not paragraph[end].isspace():
            continue  # mid-token punctuation, e.g. "5-4." inside "5-4.5"
        if _is_abbreviation_boundary(paragraph, match):
            continue
        if _continues_lowercase(paragraph, end):
            continue
        piece = paragraph[start:end].strip()
        if piece:
            sentences.append(piece)
        start = end
    tail = paragraph[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def _is_abbreviation_boundary(text: str, match: re.Match) -> bool:
    if not match.group().startswith("."):
        return False
    before = text[: match.start()]
    word = re.search(r"[\w.]*\w$", before)
    if word is None:
        return False
    token = word.group().lower()
    if token in _ABBREVIATIONS:
        return True
    if len(token) == 1 and token.isalpha():
        return True  # single initial, e.g. "J."
    # decimal or versioned number: "3.14", "4.7"
    if token[-1].isdigit() and match.end() < len(text):
        after = text[match.end():].lstrip()
        if after[:1].isdigit():
            return True
    return False


def _continues_lowercase(text: str, end: int) -> bool:
    rest = text[end:].lstrip()
    return bool(rest) and rest[0].islower()


def _parse_claim_list(raw: str) -> list[str]:
    """Parse the strict line-delimited claim list grammar.

    Accepts lines starting with "-", "*", or an enumeration marker such as
    "1." / "2)"; the single token NO_CLAIMS means an empty list. Any other
    non-empty line is a grammar violation.
    """
    lines = [line.strip() for line in raw.strip().splitlines() if line.strip()]
    if lines == ["NO_CLAIMS"]:
        return []
    claims = []
    for line in lines:
        m = re.match(r"^(?:[-*]|\d+[.)])\s+(.+)$", line)
        if m is None:
            raise ParseError(f"reply line is not a list item: {line[:80]!r}", raw=raw)
        claims.append(m.group(1).strip())
    if not claims and lines:
        raise ParseError("reply contained no list items", raw=raw)
    return claims


def decompose_document(document: str, gateway: ModelGateway) -> list[Claim]:
    """Extract atomic claims from the whole document in one model call."""
    prompt = render_prompt("decompose.v1.txt", document=document)
    reply = gateway.chat(prompt)
    texts = _parse_claim_list(reply.text)
    return [Claim(text=t, origin=ClaimOrigin.LLM_DECOMPOSED) for t in texts]


def decompose_per_sentence(document: str, gateway: ModelGateway) -> list[Claim]:
    """Split into sentences first, then decompose each sentence.

    Sentences that yield no claims are skipped. Claims carry the index of
    their source sentence, which is therefore non-decreasing.
    """
    claims: list[Claim] = []
    for index, sentence in enumerate(split_sentences(document)):
        prompt = render_prompt(
            "decompose_sentence.v1.txt", document=document, sentence=sentence
        )
        reply = gateway.chat(prompt)
        for text in _parse_claim_list(reply.text):
            claims.append(
                Claim(
                    text=text,
                    origin=ClaimOrigin.LLM_DECOMPOSED,
                    source_sentence_index=index,
                )
            )
    return claims


def decontextualize(claim: Claim, document: str, gateway: ModelGateway) -> Claim:
    """Rewrite a claim so pronouns and references resolve without the document."""
    if not claim.text.strip():
        raise ValueError("claim text must be non-empty")
    prompt = render_prompt("decontextualize.v1.txt", document=document, claim=claim.text)
    reply = gateway.chat(prompt)
    lines = [line.strip() for line in reply.text.strip().splitlines() if line.strip()]
    if not lines:
        raise ParseError("empty decontextualization reply", raw=reply.text)
    text = re.sub(r"^(?:[-*]|\d+[.)])\s+", "", lines[0]).strip()
    if not text:
        raise ParseError("decontextualization reply had no claim text", raw=reply.text)
    return Claim(
        text=text,
        origin=ClaimOrigin.DECONTEXTUALIZED,
        source_sentence_index=claim.source_sentence_index,
    )
