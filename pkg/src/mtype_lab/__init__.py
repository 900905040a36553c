"""Exact computation of Haar and martingale type/cotype ideal norms of finite-rank operators."""

from .errors import (
    ConstructionError,
    DegenerateWitnessError,
    DimensionError,
    LevelCapError,
    MartingaleError,
    MtypeLabError,
    PartitionError,
)
from .factorization import FactorizationResult, basis_witness, build_factorization, verify_factorization
from .haar import DEFAULT_LEVEL_CAP, HaarCoefficients, analyze, haar_fn, synthesize, tree
from .ideal_norms import (
    IdealNormEstimate,
    SearchConfig,
    estimate,
    haar_ratio,
    martingale_ratio,
    type_p_ratio,
    verify_relations,
)
from .martingales import (
    MDS,
    Filtration,
    block,
    equalize,
    from_haar_coeffs,
    glue,
    mds_to_cotype_instance,
    normalize_mds,
    validate,
)
from .operators import OperatorSpec, adjoint, diagonal_operator, identity_operator, operator_norm, summation_operator
from .scalars import QuadRational
from .stepfn import L1, L2, LINF, IntervalPartition, NormKind, StepFunction

__version__ = "0.1.0"
