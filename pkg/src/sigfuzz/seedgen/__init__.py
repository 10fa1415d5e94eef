"""Initial seed generation: bounded unrolling with constraint search, n-wise cases."""

from .nwise import FastNWise, NWiseSuite, covers_nwise, fast_nwise
from .seeds import (
    SOLVED,
    UNKNOWN,
    UNSAT_BOUND,
    SeedReport,
    SeedResult,
    TargetResult,
    assignment_to_test,
    default_unroll,
    generate_initial_seeds,
    nwise_seeds,
    reached_targets,
    run_seedgen,
    solve_target,
)
from .unroll import PathConstraintSystem, unroll

__all__ = [
    "FastNWise",
    "NWiseSuite",
    "PathConstraintSystem",
    "SOLVED",
    "SeedReport",
    "SeedResult",
    "TargetResult",
    "UNKNOWN",
    "UNSAT_BOUND",
    "assignment_to_test",
    "covers_nwise",
    "default_unroll",
    "fast_nwise",
    "generate_initial_seeds",
    "nwise_seeds",
    "reached_targets",
    "run_seedgen",
    "solve_target",
    "unroll",
]
