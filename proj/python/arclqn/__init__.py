"""Cubic-regularized limited-memory SR1 optimization (ARC outer loop,
exact matrix-free subproblem solver)."""

from ._core import (
    ArcConfig,
    Branch,
    CaseKind,
    DenseSolveOptions,
    FallbackKind,
    LqnState,
    Problem,
    SolveMode,
    StepCase,
    StepReport,
    SubproblemCase,
    SubproblemSolution,
    ToleranceSet,
    Trace,
    UpdateOutcome,
    UpdateReason,
    arc_run,
    cauchy_point,
    dense_solve_subproblem,
    logistic_synth,
    make_subproblem_case,
    quadratic,
    rosenbrock,
    solve_subproblem,
)

__all__ = [
    "ArcConfig",
    "Branch",
    "CaseKind",
    "DenseSolveOptions",
    "FallbackKind",
    "LqnState",
    "Problem",
    "SolveMode",
    "StepCase",
    "StepReport",
    "SubproblemCase",
    "SubproblemSolution",
    "ToleranceSet",
    "Trace",
    "UpdateOutcome",
    "UpdateReason",
    "arc_run",
    "cauchy_point",
    "dense_solve_subproblem",
    "logistic_synth",
    "make_subproblem_case",
    "quadratic",
    "rosenbrock",
    "solve_subproblem",
]

__version__ = "0.1.0"
