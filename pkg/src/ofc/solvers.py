"""Built-in solver implementations registered at startup.

Three claim processors, two retrievers, and two verifiers; external code can
add more through the registry interface as long as the declared input and
output semantics line up.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Any

from . import processors, retrievers, verifiers
from .errors import GatewayError, NLIError
from .pipeline import Solver, SolverRegistry, SolverRuntime
from .retrievers import CorpusIndex, load_index, search_client_from_env
from .types import Claim, Evidence, FactCheckState, Verdict
from .verifiers import HttpNLIClient, LexicalOverlapNLI

_index_cache: dict[tuple[str, float], CorpusIndex] = {}


def _cached_index(path: str) -> CorpusIndex:
    mtime = os.path.getmtime(path)
    key = (str(Path(path).resolve()), mtime)
    if key not in _index_cache:
        _index_cache.clear()  # one desk-scale index at a time is plenty
        _index_cache[key] = load_index(path)
    return _index_cache[key]


def _require_gateway(runtime: SolverRuntime):
    if runtime.gateway is None:
        raise GatewayError("this solver needs a model gateway; none was configured")
    return runtime.gateway


class DocumentDecomposeSolver(Solver):
    """FacTool-style: extract claims from the whole document at once."""

    def __init__(self, params: dict, runtime: SolverRuntime):
        self.gateway = _require_gateway(runtime)

    def run(self, state: FactCheckState, value: Any) -> list[Claim]:
        document = value if isinstance(value, str) else state.document
        state.sentences = processors.split_sentences(document)
        claims = processors.decompose_document(document, self.gateway)
        state.claims = claims
        return claims


class SentenceDecomposeSolver(Solver):
    """FactScore-style: split into sentences, then decompose each one."""

    def __init__(self, params: dict, runtime: SolverRuntime):
        self.gateway = _require_gateway(runtime)

    def run(self, state: FactCheckState, value: Any) -> list[Claim]:
        document = value if isinstance(value, str) else state.document
        state.sentences = processors.split_sentences(document)
        claims = processors.decompose_per_sentence(document, self.gateway)
        state.claims = claims
        return claims


class DecontextualizingDecomposeSolver(Solver):
    """Factcheck-GPT-style: per-sentence decomposition, then rewrite each
    claim so it stands on its own."""

    def __init__(self, params: dict, runtime: SolverRuntime):
        self.gateway = _require_gateway(runtime)

    def run(self, state: FactCheckState, value: Any) -> list[Claim]:
        document = value if isinstance(value, str) else state.document
        state.sentences = processors.split_sentences(document)
        claims = [
            processors.decontextualize(claim, document, self.gateway)
            for claim in processors.decompose_per_sentence(document, self.gateway)
        ]
        state.claims = claims
        return claims


class Bm25RetrieverSolver(Solver):
    def __init__(self, params: dict, runtime: SolverRuntime):
        index_path = params.get("index_path")
        if not index_path:
            raise ValueError("bm25 retriever requires an index_path param")
        self.index = _cached_index(str(index_path))
        self.k = int(params.get("k", retrievers.DEFAULT_TOP_K))
        self.k1 = float(params.get("k1", retrievers.DEFAULT_K1))
        self.b = float(params.get("b", retrievers.DEFAULT_B))

    def run(self, state: FactCheckState, value: Any) -> dict[str, list[Evidence]]:
        claims: list[Claim] = value if value is not None else state.claims
        evidence = {
            claim.id: retrievers.bm25_retrieve(claim, self.index, self.k, self.k1, self.b)
            for claim in claims
        }
        state.evidence = evidence
        return evidence


class WebSearchRetrieverSolver(Solver):
    def __init__(self, params: dict, runtime: SolverRuntime):
        self.client = runtime.search_client or search_client_from_env(runtime.meter)
        self.k = int(params.get("k", retrievers.DEFAULT_TOP_K))

    def run(self, state: FactCheckState, value: Any) -> dict[str, list[Evidence]]:
        claims: list[Claim] = value if value is not None else state.claims
        evidence = {
            claim.id: retrievers.web_search(claim, self.client, self.k) for claim in claims
        }
        state.evidence = evidence
        return evidence


class LlmVerifierSolver(Solver):
    def __init__(self, params: dict, runtime: SolverRuntime):
        self.gateway = _require_gateway(runtime)

    def run(self, state: FactCheckState, value: Any) -> dict[str, Verdict]:
        evidence: dict[str, list[Evidence]] = value if value is not None else state.evidence
        verdicts = {
            claim.id: verifiers.verify_llm(claim, evidence.get(claim.id, []), self.gateway)
            for claim in state.claims
        }
        state.verdicts = verdicts
        if verdicts:
            state.document_verdict = verifiers.aggregate_document(list(verdicts.values()))
        return verdicts


class NliVerifierSolver(Solver):
    def __init__(self, params: dict, runtime: SolverRuntime):
        mode = params.get("mode", "lexical")
        if runtime.nli is not None:
            self.nli = runtime.nli
        elif mode == "lexical":
            self.nli = LexicalOverlapNLI()
        elif mode == "http":
            url = params.get("url") or os.environ.get("OFC_NLI_URL", "")
            if not url:
                raise NLIError("nli verifier in http mode requires a url param or OFC_NLI_URL")
            self.nli = HttpNLIClient(url=url)
        else:
            raise ValueError(f"unknown nli mode {mode!r}")

    def run(self, state: FactCheckState, value: Any) -> dict[str, Verdict]:
        evidence: dict[str, list[Evidence]] = value if value is not None else state.evidence
        verdicts = {
            claim.id: verifiers.verify_nli(claim, evidence.get(claim.id, []), self.nli)
            for claim in state.claims
        }
        state.verdicts = verdicts
        if verdicts:
            state.document_verdict = verifiers.aggregate_document(list(verdicts.values()))
        return verdicts


BUILTIN_SOLVERS = (
    ("decompose.document.v1", "claim_processor", "document", "claims", DocumentDecomposeSolver),
    ("decompose.sentence.v1", "claim_processor", "document", "claims", SentenceDecomposeSolver),
    ("decompose.decontext.v1", "claim_processor", "document", "claims", DecontextualizingDecomposeSolver),
    ("retrieve.bm25.v1", "retriever", "claims", "evidence", Bm25RetrieverSolver),
    ("retrieve.web.v1", "retriever", "claims", "evidence", WebSearchRetrieverSolver),
    ("verify.llm.v1", "verifier", "evidence", "verdicts", LlmVerifierSolver),
    ("verify.nli.v1", "verifier", "evidence", "verdicts", NliVerifierSolver),
)


def build_default_registry() -> SolverRegistry:
    registry = SolverRegistry()
    for key, kind, input_type, output_type, cls in BUILTIN_SOLVERS:
        registry.register(key, kind, input_type, output_type, cls)
    return registry
