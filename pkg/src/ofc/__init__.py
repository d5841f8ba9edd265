"""Fact-checking pipelines, LLM factuality evaluation, and checker benchmarking."""

__version__ = "0.1.0"

from .pipeline import (  # noqa: F401
    PipelineConfig,
    SolverBinding,
    SolverRegistry,
    SolverRuntime,
    parse_config,
    register_solver,
    run_pipeline,
    validate_chain,
)
from .solvers import build_default_registry  # noqa: F401
from .types import Claim, Evidence, FactCheckState, Label, Stance, Verdict  # noqa: F401
