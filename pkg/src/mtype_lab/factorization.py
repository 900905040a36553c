"""Factor the summation operator through ``[L2, T]`` using a martingale witness.

Given ``2n`` martingale differences of equal norm ``c`` and a functional
``g`` in the dual of ``[L2, Y]``, keep the indices whose pairing with ``g``
is large, take the first ``n`` of them and set

    A e_k = d_{i_k} / <T d_{i_k}, g>,      B f = (<f, E_{i_k} g>)_k.

``B [L2,T] A`` is then exactly the lower-triangular matrix of ones: the
``(h, k)`` entry is 1 when ``i_h >= i_k`` (measurability) and 0 otherwise
(the martingale property).  The norm bound is stated relative to the
equal-norm ratio ``r`` achieved by the supplied witness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .errors import ConstructionError, DimensionError, MartingaleError
from .martingales import MDS, validate
from .operators import OperatorSpec, apply_l2
from .scalars import ONE, ZERO, QuadRational, as_quad
from .stepfn import NormKind, StepFunction, conditional_expectation, l2_norm_sq, pairing

__all__ = [
    "DEFAULT_SCHEDULE",
    "FactorizationResult",
    "FactorizationReport",
    "build_factorization",
    "verify_factorization",
    "norming_functional",
    "summation_matrix",
    "basis_witness",
]

DEFAULT_SCHEDULE = (Fraction(9, 10), Fraction(3, 4), Fraction(1, 2), Fraction(1, 4))


def summation_matrix(n: int) -> List[List[QuadRational]]:
    return [[ONE if h >= k else ZERO for k in range(n)] for h in range(n)]


def _sign(x: QuadRational) -> int:
    return x.sign()


def _norming_vector(v, norm: NormKind) -> tuple:
    """``w`` with ``<v, w> = ||v||^2`` and ``||w||_* = ||v||``."""
    if norm.tag == "l2":
        return tuple(v)
    if norm.tag == "l1":
        s = norm.norm(v)
        return tuple(s * _sign(x) for x in v)
    if norm.tag == "linf":
        s = norm.norm(v)
        out = [ZERO] * len(v)
        if s:
            # spread evenly over all maximal coordinates so ties are treated alike
            ties = [i for i, x in enumerate(v) if abs(x) == s]
            for i in ties:
                out[i] = s * _sign(v[i]) / len(ties)
        return tuple(out)
    raise ValueError(f"no norming functional for {norm.tag}")


def _rational_above(x_sq: QuadRational) -> Fraction:
    """A rational ``lam > 0`` with ``lam^2 >= x_sq``, within about 1e-9 relative."""
    s = x_sq.sqrt_float()
    lam = Fraction(math.ceil(s * 10 ** 9) + 1, 10 ** 9)
    while QuadRational(lam * lam, 0) < x_sq:
        lam *= Fraction(1001, 1000)
    return lam


def norming_functional(S: StepFunction, norm: NormKind) -> StepFunction:
    """``g`` with ``||g||_{L2} <= 1`` in the dual norm and ``<S, g> = ||S||^2 / lam`` for rational ``lam >= ||S||``."""
    total = l2_norm_sq(S, norm)
    if not total:
        raise ConstructionError("the witness sum vanishes; no norming functional")
    lam = _rational_above(total)
    return StepFunction(S.partition, [_norming_vector(v, norm) for v in S.values], S.dimension).scale(1 / lam)


@dataclass
class FactorizationResult:
    n: int
    indices: List[int]                 # 1-based, increasing
    A: List[StepFunction]              # A e_k
    B: List[StepFunction]              # the functionals E_{i_k} g
    pairings: List[QuadRational]       # <T d_{i_k}, g>
    normA_sq: QuadRational
    normB_sq: QuadRational
    witness_ratio_sq: QuadRational     # equal-norm ratio r^2 of the supplied witness
    delta: Fraction
    selected: List[int]                # all of F, 1-based
    matrix: List[List[QuadRational]]
    notes: List[str] = field(default_factory=list)

    @property
    def product_bound(self) -> float:
        return math.sqrt(float(self.normA_sq) * float(self.normB_sq))

    @property
    def witness_bound(self) -> float:
        """``6 sqrt(n) / (delta r)``."""
        return 6 * math.sqrt(self.n) / (float(self.delta) * self.witness_ratio_sq.sqrt_float())

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "indices": list(self.indices),
            "selected": list(self.selected),
            "delta": str(self.delta),
            "A": [f.to_json() for f in self.A],
            "B": [g.to_json() for g in self.B],
            "pairings": [p.to_json() for p in self.pairings],
            "normA_sq": self.normA_sq.to_json(),
            "normB_sq": self.normB_sq.to_json(),
            "product_bound": self.product_bound,
            "witness_ratio_sq": self.witness_ratio_sq.to_json(),
            "witness_bound": self.witness_bound,
            "matrix": [[x.to_json() for x in row] for row in self.matrix],
            "notes": list(self.notes),
        }


def basis_witness(d: int, n: int) -> MDS:
    """Equal-norm Haar martingale of length ``2n`` in dimension ``d``.

    Level ``k`` uses ``2**(-(k-1)/2) e_{(k-1) mod d}`` at every index, so every
    difference has norm 1 in any l_p norm.  For the identity on l1^d with
    ``d >= 2n`` the sum has constant coordinates of modulus 1.
    """
    from .haar import HaarCoefficients, haar_scale, tree
    from .martingales import from_haar_coeffs

    coeffs = {}
    for k, j in tree(1, 2 * n, cap=max(2 * n, 12)):
        v = [ZERO] * d
        v[(k - 1) % d] = haar_scale(k).inverse()
        coeffs[(k, j)] = tuple(v)
    return from_haar_coeffs(HaarCoefficients(1, 2 * n, d, coeffs))


def _equal_norm(m: MDS, norm: NormKind) -> QuadRational:
    norms = m.norms_sq(norm)
    if any(x != norms[0] for x in norms):
        raise MartingaleError("the witness must have differences of exactly equal norm")
    if not norms[0]:
        raise MartingaleError("the witness differences vanish")
    return norms[0]


def _compose(T: OperatorSpec, A: Sequence[StepFunction], B: Sequence[StepFunction]):
    TA = [apply_l2(T, f) for f in A]
    return [[pairing(TA[k], B[h]) for k in range(len(A))] for h in range(len(B))]


def _select(pairings, threshold_sq: QuadRational) -> List[int]:
    return [k + 1 for k, p in enumerate(pairings) if p > ZERO and p * p > threshold_sq]


def build_factorization(T: OperatorSpec, m: MDS, g: Optional[StepFunction] = None,
                        delta=None, schedule: Sequence = DEFAULT_SCHEDULE) -> FactorizationResult:
    """Factor the ``n x n`` summation matrix, ``n = len(m) / 2``.

    ``delta`` fixes the threshold; otherwise the schedule is tried in order
    and the first value leaving at least ``n`` indices is used.
    """
    if len(m) % 2 or not len(m):
        raise ValueError("the witness must have an even, positive number of differences")
    if m.dimension != T.cols:
        raise DimensionError(f"operator has {T.cols} columns, witness has dimension {m.dimension}")
    report = validate(m)
    if not report:
        raise MartingaleError("invalid witness: " + "; ".join(report.violations))
    n = len(m) // 2
    c_sq = _equal_norm(m, T.source)
    Td = [apply_l2(T, d) for d in m.differences]
    S = Td[0]
    for f in Td[1:]:
        S = S + f
    S_sq = l2_norm_sq(S, T.target)
    if not S_sq:
        raise ConstructionError("the witness has zero type ratio")
    # r^2 = ||sum T d_k||^2 / (2n c^2)
    r_sq = S_sq / (2 * n * c_sq)
    if g is None:
        g = norming_functional(S, T.target)
    elif g.dimension != T.rows:
        raise DimensionError("the functional must live in the dual of the target")
    if l2_norm_sq(g, T.target.dual()) > ONE:
        raise ValueError("the functional must have L2 norm at most 1")
    pairings = [pairing(f, g) for f in Td]
    if not pairing(S, g) > ZERO:
        raise ConstructionError("the functional does not pair positively with the witness sum")

    deltas = [Fraction(delta)] if delta is not None else [Fraction(x) for x in schedule]
    for dl in deltas:
        if not 0 < dl < 1:
            raise ValueError("delta must lie in (0, 1)")
    chosen, F = None, []
    for dl in deltas:
        # pairing > c r delta / (4 sqrt(2n)), squared
        F = _select(pairings, c_sq * r_sq * dl * dl / (32 * n))
        if len(F) >= n:
            chosen = dl
            break
    if chosen is None:
        raise ConstructionError(
            f"only {len(F)} indices pass the threshold, {n} needed; lower delta or strengthen the witness")
    idx = F[:n]
    A = [m.differences[i - 1].scale(pairings[i - 1].inverse()) for i in idx]
    parts = m.filtration.partitions
    B = [conditional_expectation(g, parts[i]) for i in idx]
    normA_sq = max((c_sq / (pairings[i - 1] * pairings[i - 1]) for i in idx))
    normB_sq = max((l2_norm_sq(b, T.target.dual()) for b in B))
    return FactorizationResult(
        n=n, indices=idx, A=A, B=B, pairings=[pairings[i - 1] for i in idx],
        normA_sq=normA_sq, normB_sq=normB_sq, witness_ratio_sq=r_sq, delta=chosen,
        selected=F, matrix=_compose(T, A, B),
        notes=["norm bound is relative to the supplied witness's equal-norm ratio r"])


@dataclass
class FactorizationReport:
    ok: bool
    mismatches: List[Tuple[int, int]]
    normA_sq: QuadRational
    normB_sq: QuadRational
    product_bound: float
    norms_match: bool

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "mismatches": [list(x) for x in self.mismatches],
            "normA_sq": self.normA_sq.to_json(),
            "normB_sq": self.normB_sq.to_json(),
            "product_bound": self.product_bound,
            "norms_match": self.norms_match,
        }


def verify_factorization(res: FactorizationResult, T: OperatorSpec) -> FactorizationReport:
    """Recompute every entry of ``B [L2,T] A`` and both norms from the stored maps."""
    M = _compose(T, res.A, res.B)
    target = summation_matrix(res.n)
    bad = [(h + 1, k + 1) for h in range(res.n) for k in range(res.n) if M[h][k] != target[h][k]]
    a_sq = max((l2_norm_sq(f, T.source) for f in res.A))
    b_sq = max((l2_norm_sq(g, T.target.dual()) for g in res.B))
    norms_match = a_sq == res.normA_sq and b_sq == res.normB_sq
    return FactorizationReport(
        ok=not bad and norms_match, mismatches=bad, normA_sq=a_sq, normB_sq=b_sq,
        product_bound=math.sqrt(float(a_sq) * float(b_sq)), norms_match=norms_match)
