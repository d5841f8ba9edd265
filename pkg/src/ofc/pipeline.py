"""Task-solver abstraction and the chain execution engine.

A pipeline is an ordered list of solver bindings wired by name-matched
message passing: each solver reads its ``input_name`` slot from the state
and writes its ``output_name`` slot. The registry also declares a semantic
type per solver input/output (document, claims, evidence, verdicts), and
chain validation compares those tags in addition to the names, which
catches wiring mistakes that name matching alone would let through.

The engine is total: a raising solver becomes a failed trace entry with the
error message in ``note``, the success flag flips to false, and execution
halts without tearing down the caller.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import yaml

from .errors import (
    ChainMismatch,
    ConfigSyntaxError,
    DuplicateKey,
    MissingInputSlot,
    SchemaError,
    UnknownSolver,
)
from .gateway import CostMeter, ModelGateway
from .types import FactCheckState, SolverTrace

SOLVER_KINDS = ("claim_processor", "retriever", "verifier", "other")


@dataclass(frozen=True)
class SolverBinding:
    name: str
    kind: str
    implementation: str
    input_name: str
    output_name: str
    params: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class PipelineConfig:
    pipeline_id: str
    solvers: tuple[SolverBinding, ...]


@dataclass
class SolverRuntime:
    """Shared handles a solver factory may draw on."""

    gateway: Optional[ModelGateway] = None
    meter: CostMeter = field(default_factory=CostMeter)
    nli: Any = None
    search_client: Any = None
    data_dir: Optional[str] = None


class Solver:
    """One pipeline step. Subclasses implement run(state, value) -> value."""

    def run(self, state: FactCheckState, value: Any) -> Any:
        raise NotImplementedError


@dataclass(frozen=True)
class RegistryEntry:
    key: str
    kind: str
    input_type: str
    output_type: str
    factory: Callable[[dict, SolverRuntime], Solver]


class SolverRegistry:
    """Immutable-after-startup mapping of implementation keys to factories."""

    def __init__(self):
        self._entries: dict[str, RegistryEntry] = {}

    def register(
        self,
        key: str,
        kind: str,
        input_type: str,
        output_type: str,
        factory: Callable[[dict, SolverRuntime], Solver],
    ) -> None:
        if key in self._entries:
            raise DuplicateKey(key)
        if kind not in SOLVER_KINDS:
            raise SchemaError("UnknownKind", f"kind {kind!r} is not one of {SOLVER_KINDS}")
        self._entries[key] = RegistryEntry(key, kind, input_type, output_type, factory)

    def resolve(self, key: str) -> RegistryEntry:
        entry = self._entries.get(key)
        if entry is None:
            raise UnknownSolver(key)
        return entry

    def __contains__(self, key: str) -> bool:
        return key in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def listing(self) -> list[dict]:
        return [
            {
                "key": e.key,
                "kind": e.kind,
                "input_type": e.input_type,
                "output_type": e.output_type,
            }
            for e in self._entries.values()
        ]


def register_solver(
    registry: SolverRegistry,
    key: str,
    kind: str,
    io_declaration: tuple[str, str],
    factory: Callable[[dict, SolverRuntime], Solver],
) -> SolverRegistry:
    """Functional wrapper over SolverRegistry.register; returns the registry."""
    registry.register(key, kind, io_declaration[0], io_declaration[1], factory)
    return registry


REQUIRED_BINDING_FIELDS = ("name", "kind", "implementation", "input_name", "output_name")


def parse_config(config_text: str) -> PipelineConfig:
    """Parse the YAML pipeline configuration format.

    Top level: ``pipeline_id`` and a non-empty ``solvers`` list whose entries
    carry name, kind, implementation, input_name, output_name, and an
    optional flat params map.
    """
    try:
        raw = yaml.safe_load(config_text)
    except yaml.YAMLError as exc:
        raise ConfigSyntaxError(f"malformed configuration: {exc}") from exc
    if not isinstance(raw, dict):
        raise SchemaError("NotAMapping", "configuration root must be a mapping")
    pipeline_id = raw.get("pipeline_id")
    if not pipeline_id or not isinstance(pipeline_id, str):
        raise SchemaError("MissingField", "pipeline_id is required")
    solvers_raw = raw.get("solvers")
    if not isinstance(solvers_raw, list) or not solvers_raw:
        raise SchemaError("EmptyPipeline", "solvers must be a non-empty list")
    bindings = []
    for i, entry in enumerate(solvers_raw):
        if not isinstance(entry, dict):
            raise SchemaError("MalformedBinding", f"solver entry {i} must be a mapping")
        for field_name in REQUIRED_BINDING_FIELDS:
            if field_name not in entry or entry[field_name] in (None, ""):
                raise SchemaError(
                    "MissingField", f"solver entry {i} is missing {field_name!r}"
                )
        if entry["kind"] not in SOLVER_KINDS:
            raise SchemaError(
                "UnknownKind",
                f"solver entry {i} kind {entry['kind']!r} is not one of {SOLVER_KINDS}",
            )
        params = entry.get("params") or {}
        if not isinstance(params, dict):
            raise SchemaError("MalformedBinding", f"solver entry {i} params must be a mapping")
        bindings.append(
            SolverBinding(
                name=str(entry["name"]),
                kind=entry["kind"],
                implementation=str(entry["implementation"]),
                input_name=str(entry["input_name"]),
                output_name=str(entry["output_name"]),
                params=dict(params),
            )
        )
    return PipelineConfig(pipeline_id=pipeline_id, solvers=tuple(bindings))


def validate_chain(config: PipelineConfig, registry: SolverRegistry) -> None:
    """Check solver resolution, name matching, and semantic type matching.

    Raises UnknownSolver or ChainMismatch; returns None when the chain is ok.
    """
    entries = []
    for binding in config.solvers:
        entries.append(registry.resolve(binding.implementation))
    for i in range(len(config.solvers) - 1):
        current, following = config.solvers[i], config.solvers[i + 1]
        if current.output_name != following.input_name:
            raise ChainMismatch(
                position=i + 1, expected=current.output_name, found=following.input_name
            )
        if entries[i].output_type != entries[i + 1].input_type:
            raise ChainMismatch(
                position=i + 1, expected=entries[i].output_type, found=entries[i + 1].input_type
            )


def run_pipeline(
    state: FactCheckState,
    config: PipelineConfig,
    registry: SolverRegistry,
    runtime: Optional[SolverRuntime] = None,
    start_at: int = 0,
) -> FactCheckState:
    """Execute the configured chain from ``start_at`` onward.

    When starting at 0 the first solver's input slot is seeded from the
    state's document; otherwise the caller must have pre-seeded the input
    slot of the start solver (e.g. via seed_claims to skip decomposition).
    """
    runtime = runtime or SolverRuntime()
    if not 0 <= start_at < len(config.solvers):
        raise ValueError(f"start_at {start_at} out of range for {len(config.solvers)} solvers")

    first = config.solvers[start_at]
    if start_at == 0:
        if first.input_name not in state.named_slots:
            state.set_slot(first.input_name, state.document, "document")
    elif first.input_name not in state.named_slots:
        raise MissingInputSlot(first.input_name, start_at)

    for position in range(start_at, len(config.solvers)):
        binding = config.solvers[position]
        entry = registry.resolve(binding.implementation)
        tokens_before, tokens_out_before, searches_before, cost_before = runtime.meter.snapshot()
        started = time.perf_counter()
        try:
            solver = entry.factory(binding.params, runtime)
            value = state.named_slots.get(binding.input_name)
            result = solver.run(state, value)
        except Exception as exc:  # noqa: BLE001 - the engine is total by contract
            t_in, t_out, searches, cost = runtime.meter.snapshot()
            state.trace.append(
                SolverTrace(
                    solver_name=binding.name,
                    succeeded=False,
                    duration_ms=(time.perf_counter() - started) * 1000.0,
                    tokens_in=t_in - tokens_before,
                    tokens_out=t_out - tokens_out_before,
                    searches=searches - searches_before,
                    cost=cost - cost_before,
                    note=f"{type(exc).__name__}: {exc}",
                )
            )
            state.total_cost += cost - cost_before
            state.success = False
            return state
        state.set_slot(binding.output_name, result, entry.output_type)
        t_in, t_out, searches, cost = runtime.meter.snapshot()
        state.trace.append(
            SolverTrace(
                solver_name=binding.name,
                succeeded=True,
                duration_ms=(time.perf_counter() - started) * 1000.0,
                tokens_in=t_in - tokens_before,
                tokens_out=t_out - tokens_out_before,
                searches=searches - searches_before,
                cost=cost - cost_before,
            )
        )
        state.total_cost += cost - cost_before
    state.success = True
    return state
