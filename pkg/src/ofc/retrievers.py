"""Evidence collection: offline BM25 over a passage index, or web search.

Tokenization is lowercase alphanumeric word splitting with no stemming and
stopwords kept; documents are chunked into overlapping token windows
(default 256 tokens, stride 128). BM25 uses the Okapi form

    score(q, p) = sum_t idf(t) * tf * (k1+1) / (tf + k1*(1 - b + b*|p|/avgdl))
    idf(t)      = ln(1 + (N - n_t + 0.5) / (n_t + 0.5))

summed over the query token sequence. Web results are mapped to evidence
with score = 1/rank since search engines return no score of their own.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field
from math import log
from pathlib import Path
from typing import Optional

import requests

from .errors import AuthError, EmptyCorpus, IndexFormatError, NetworkError, RateLimited
from .gateway import CostMeter
from .types import Claim, Evidence

INDEX_MAGIC = "OFCIDX1"
DEFAULT_K1 = 1.5
DEFAULT_B = 0.75
DEFAULT_WINDOW = 256
DEFAULT_STRIDE = 128
DEFAULT_TOP_K = 5

_TOKEN = re.compile(r"[a-z0-9]+")
_TOKEN_SPAN = re.compile(r"[A-Za-z0-9]+")


def tokenize(text: str) -> list[str]:
    return _TOKEN.findall(text.lower())


@dataclass
class Passage:
    doc_id: str
    title: str
    offset: int  # token offset of the window within its document
    text: str
    length: int  # token count


@dataclass
class CorpusIndex:
    passages: list[Passage]
    postings: dict[str, list[tuple[int, int]]]  # term -> [(passage index, tf)]
    passage_lengths: list[int]
    avgdl: float
    n_passages: int
    window: int = DEFAULT_WINDOW
    stride: int = DEFAULT_STRIDE

    def check_invariants(self) -> None:
        if self.passage_lengths != [p.length for p in self.passages]:
            raise ValueError("passage_lengths out of sync with passages")
        if self.n_passages != len(self.passages):
            raise ValueError("passage count out of sync")
        if self.passages:
            expected = sum(self.passage_lengths) / len(self.passage_lengths)
            if abs(self.avgdl - expected) > 1e-9:
                raise ValueError("avgdl is not the mean passage length")


def _chunk_tokens(text: str, window: int, stride: int) -> list[tuple[int, str, int]]:
    """Split text into (token offset, passage text, token count) windows.

    Windows start at multiples of the stride and stop once a window reaches
    the final token, so the tail is never emitted twice.
    """
    spans = [(m.start(), m.end()) for m in _TOKEN_SPAN.finditer(text)]
    if not spans:
        return []
    chunks = []
    start = 0
    while True:
        window_spans = spans[start : start + window]
        chunk_text = text[window_spans[0][0] : window_spans[-1][1]]
        chunks.append((start, chunk_text, len(window_spans)))
        if start + window >= len(spans):
            break
        start += stride
    return chunks


def build_index(
    corpus: list[dict],
    passage_window: int = DEFAULT_WINDOW,
    stride: int = DEFAULT_STRIDE,
) -> CorpusIndex:
    """Index a corpus of {doc_id, title, text} records into BM25 postings."""
    if not corpus:
        raise EmptyCorpus("cannot index an empty corpus")
    passages: list[Passage] = []
    for doc in corpus:
        for offset, text, length in _chunk_tokens(doc["text"], passage_window, stride):
            passages.append(
                Passage(
                    doc_id=doc["doc_id"],
                    title=doc.get("title", ""),
                    offset=offset,
                    text=text,
                    length=length,
                )
            )
    postings: dict[str, list[tuple[int, int]]] = {}
    for idx, passage in enumerate(passages):
        counts: dict[str, int] = {}
        for token in tokenize(passage.text):
            counts[token] = counts.get(token, 0) + 1
        for term, tf in counts.items():
            postings.setdefault(term, []).append((idx, tf))
    lengths = [p.length for p in passages]
    index = CorpusIndex(
        passages=passages,
        postings=postings,
        passage_lengths=lengths,
        avgdl=sum(lengths) / len(lengths) if lengths else 0.0,
        n_passages=len(passages),
        window=passage_window,
        stride=stride,
    )
    index.check_invariants()
    return index


def bm25_scores(index: CorpusIndex, query_tokens: list[str], k1: float, b: float) -> dict[int, float]:
    """Accumulated BM25 score per passage, only passages matching >= 1 term."""
    scores: dict[int, float] = {}
    n = index.n_passages
    for term in query_tokens:
        plist = index.postings.get(term)
        if not plist:
            continue
        n_t = len(plist)
        idf = log(1.0 + (n - n_t + 0.5) / (n_t + 0.5))
        for pidx, tf in plist:
            norm = k1 * (1.0 - b + b * index.passage_lengths[pidx] / index.avgdl)
            scores[pidx] = scores.get(pidx, 0.0) + idf * tf * (k1 + 1.0) / (tf + norm)
    return scores


def bm25_retrieve(
    claim: Claim,
    index: CorpusIndex,
    k: int = DEFAULT_TOP_K,
    k1: float = DEFAULT_K1,
    b: float = DEFAULT_B,
) -> list[Evidence]:
    """Top-k passages by BM25, ties broken by (doc_id, offset) ascending."""
    if k < 1:
        raise ValueError("k must be >= 1")
    scores = bm25_scores(index, tokenize(claim.text), k1, b)
    ordered = sorted(
        scores.items(),
        key=lambda item: (
            -item[1],
            index.passages[item[0]].doc_id,
            index.passages[item[0]].offset,
        ),
    )
    evidence = []
    for rank, (pidx, score) in enumerate(ordered[:k], start=1):
        passage = index.passages[pidx]
        evidence.append(
            Evidence(
                claim_id=claim.id,
                text=passage.text,
                source=passage.doc_id,
                rank=rank,
                score=score,
            )
        )
    return evidence


# -- persistence ---------------------------------------------------------------


def save_index(index: CorpusIndex, path: str | Path) -> None:
    payload = {
        "version": 1,
        "window": index.window,
        "stride": index.stride,
        "passages": [
            {
                "doc_id": p.doc_id,
                "title": p.title,
                "offset": p.offset,
                "text": p.text,
                "length": p.length,
            }
            for p in index.passages
        ],
        "postings": {term: plist for term, plist in index.postings.items()},
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with tmp.open("w", encoding="utf-8") as fh:
        fh.write(INDEX_MAGIC + "\n")
        json.dump(payload, fh)
    tmp.replace(path)


def load_index(path: str | Path) -> CorpusIndex:
    with Path(path).open("r", encoding="utf-8") as fh:
        magic = fh.readline().strip()
        if magic != INDEX_MAGIC:
            raise IndexFormatError(f"bad index header {magic!r} (expected {INDEX_MAGIC})")
        payload = json.load(fh)
    passages = [Passage(**p) for p in payload["passages"]]
    lengths = [p.length for p in passages]
    index = CorpusIndex(
        passages=passages,
        postings={t: [tuple(pair) for pair in plist] for t, plist in payload["postings"].items()},
        passage_lengths=lengths,
        avgdl=sum(lengths) / len(lengths) if lengths else 0.0,
        n_passages=len(passages),
        window=payload["window"],
        stride=payload["stride"],
    )
    index.check_invariants()
    return index


def load_corpus(path: str | Path) -> list[dict]:
    """Read a line-delimited corpus file with doc_id / title / text fields."""
    docs = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            for field_name in ("doc_id", "text"):
                if field_name not in record:
                    raise IndexFormatError(f"corpus line {line_no} missing {field_name!r}")
            docs.append(record)
    return docs


# -- web search ------------------------------------------------------------------

DEFAULT_SERPER_URL = "https://google.serper.dev/search"


@dataclass
class SearchClient:
    """Serper-compatible search API client; every call is metered."""

    api_key: str
    meter: CostMeter
    url: str = DEFAULT_SERPER_URL
    timeout_s: float = 15.0
    session: Optional[requests.Session] = None

    def __post_init__(self):
        if self.session is None:
            self.session = requests.Session()

    def search(self, query: str, k: int) -> list[dict]:
        if not self.api_key:
            raise AuthError("search API key is not configured")
        try:
            resp = self.session.post(
                self.url,
                json={"q": query, "num": k},
                headers={"X-API-KEY": self.api_key, "Content-Type": "application/json"},
                timeout=self.timeout_s,
            )
        except requests.RequestException as exc:
            raise NetworkError(str(exc)) from exc
        if resp.status_code in (401, 403):
            raise AuthError(f"search authentication failed ({resp.status_code})")
        if resp.status_code == 429:
            retry_after = resp.headers.get("Retry-After")
            raise RateLimited(float(retry_after) if retry_after else None)
        if resp.status_code != 200:
            raise NetworkError(f"search returned status {resp.status_code}")
        self.meter.add_search()
        return resp.json().get("organic", [])


def web_search(claim: Claim, client: SearchClient, k: int = DEFAULT_TOP_K) -> list[Evidence]:
    """Map top-k organic results to evidence: snippet, link, position, 1/rank."""
    results = client.search(claim.text, k)
    evidence = []
    for result in results[:k]:
        rank = int(result.get("position", len(evidence) + 1))
        evidence.append(
            Evidence(
                claim_id=claim.id,
                text=result.get("snippet", ""),
                source=result.get("link", ""),
                rank=rank,
                score=1.0 / rank,
            )
        )
    return evidence


def search_client_from_env(meter: CostMeter) -> SearchClient:
    return SearchClient(
        api_key=os.environ.get("OFC_SERPER_API_KEY", ""),
        url=os.environ.get("OFC_SERPER_URL", DEFAULT_SERPER_URL),
        meter=meter,
    )
