from .core import (
    BUCKETS,
    ConsistencyVerdict,
    CSPModel,
    SolveResult,
    Violation,
    best_match,
    check_consistency,
    count_bucket,
    enumerate_solutions,
    satisfies,
)
from .engine import active_kernel

__all__ = [
    "BUCKETS",
    "ConsistencyVerdict",
    "CSPModel",
    "SolveResult",
    "Violation",
    "active_kernel",
    "best_match",
    "check_consistency",
    "count_bucket",
    "enumerate_solutions",
    "satisfies",
]
