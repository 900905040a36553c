"""Ideal norms: exact ratios, witnesses, search and certified estimates."""

from .estimate import KINDS, IdealNormEstimate, SearchConfig, estimate, upper_bounds
from .ratios import Ratio, haar_ratio, martingale_ratio, type_p_ratio
from .witnesses import (
    DiagonalValue,
    conjugate_exponent,
    diagonal_type_exact,
    diagonal_type_witness,
    summation_cotype_witness,
    summation_witness_function,
)

__all__ = [
    "KINDS", "IdealNormEstimate", "SearchConfig", "estimate", "upper_bounds",
    "Ratio", "haar_ratio", "martingale_ratio", "type_p_ratio",
    "DiagonalValue", "conjugate_exponent", "diagonal_type_exact", "diagonal_type_witness",
    "summation_cotype_witness", "summation_witness_function",
]

from .relations import EstimateCache, RelationCheck, RelationReport, verify_relations  # noqa: E402

__all__ += ["EstimateCache", "RelationCheck", "RelationReport", "verify_relations"]
