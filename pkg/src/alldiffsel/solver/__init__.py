from .propagators import (
    Inconsistent,
    MatchingState,
    OpCounter,
    maximum_matching,
    propagate_diseq,
    propagate_gac_alldiff,
    propagate_naive_alldiff,
    propagate_table,
)
from .search import RunRecord, SearchLimits, Solver, Status, solve
from .variants import (
    ALL_VARIANTS,
    DEFAULT_VARIANT,
    GAC_VARIANTS,
    NAIVE,
    SccPruning,
    Trigger,
    VariantId,
)

__all__ = [
    "ALL_VARIANTS",
    "DEFAULT_VARIANT",
    "GAC_VARIANTS",
    "Inconsistent",
    "MatchingState",
    "NAIVE",
    "OpCounter",
    "RunRecord",
    "SccPruning",
    "SearchLimits",
    "Solver",
    "Status",
    "Trigger",
    "VariantId",
    "maximum_matching",
    "propagate_diseq",
    "propagate_gac_alldiff",
    "propagate_naive_alldiff",
    "propagate_table",
    "solve",
]
