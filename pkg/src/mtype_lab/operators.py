"""Matrices between finite-dimensional l_p spaces.

Operator norms are reported as a pair of squared bounds in the scalar ring.
They coincide (``exact=True``) whenever the norm is a finite maximum:
l1 sources, linf targets, and linf->l1/l2 or l2->l1 maps of small size,
where a convex function is maximized over the sign vectors.  Only
l2->l2 and weighted norms fall back to a bracket.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionError
from .scalars import ONE, ZERO, QuadRational, as_quad
from .stepfn import L1, L2, LINF, NormKind, StepFunction, dot, vec_scale

__all__ = [
    "OperatorSpec",
    "OperatorNorm",
    "apply",
    "apply_l2",
    "operator_norm",
    "adjoint",
    "identity_operator",
    "summation_operator",
    "diagonal_operator",
    "zero_operator",
    "log_weights",
    "lift_operator",
]

# sign vectors enumerated for exact linf->l1 / linf->l2 norms
SIGN_ENUM_MAX_DIM = 16


class OperatorSpec:
    """An exact matrix ``T: (R^cols, source) -> (R^rows, target)``."""

    __slots__ = ("matrix", "source", "target", "rows", "cols", "_columns", "_float")

    def __init__(self, matrix: Sequence[Sequence], source: NormKind, target: NormKind):
        m = tuple(tuple(as_quad(x) for x in row) for row in matrix)
        if not m or not m[0]:
            raise DimensionError("operators need at least one row and column")
        cols = len(m[0])
        if any(len(r) != cols for r in m):
            raise DimensionError("ragged matrix")
        source.check_dimension(cols)
        target.check_dimension(len(m))
        self.matrix = m
        self.source = source
        self.target = target
        self.rows = len(m)
        self.cols = cols
        # sparse columns: list of (row, value) pairs with nonzero value
        self._columns = tuple(
            tuple((r, m[r][c]) for r in range(len(m)) if m[r][c]) for c in range(cols)
        )
        self._float = None

    def column(self, c: int) -> tuple:
        out = [ZERO] * self.rows
        for r, x in self._columns[c]:
            out[r] = x
        return tuple(out)

    def to_float(self) -> np.ndarray:
        if self._float is None:
            self._float = np.array([[float(x) for x in row] for row in self.matrix], dtype=float)
        return self._float

    def is_zero(self) -> bool:
        return not any(self._columns)

    def scaled(self, s) -> "OperatorSpec":
        s = as_quad(s)
        return OperatorSpec([[s * x for x in row] for row in self.matrix], self.source, self.target)

    def __eq__(self, other):
        return (isinstance(other, OperatorSpec) and self.matrix == other.matrix
                and self.source == other.source and self.target == other.target)

    def __hash__(self):
        return hash((self.matrix, self.source, self.target))

    def __repr__(self):
        return f"OperatorSpec({self.rows}x{self.cols}, {self.source} -> {self.target})"

    def to_json(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "source": self.source.to_json(),
            "target": self.target.to_json(),
            "matrix": [[x.to_json() for x in row] for row in self.matrix],
        }

    @classmethod
    def from_json(cls, obj) -> "OperatorSpec":
        for key in ("rows", "cols", "source", "target", "matrix"):
            if key not in obj:
                raise ValueError(f"operator is missing field {key!r}")
        matrix = [[QuadRational.from_json(x) for x in row] for row in obj["matrix"]]
        op = cls(matrix, NormKind.from_json(obj["source"]), NormKind.from_json(obj["target"]))
        if op.rows != int(obj["rows"]) or op.cols != int(obj["cols"]):
            raise DimensionError("declared shape does not match the matrix")
        return op


def apply(T: OperatorSpec, v: Sequence) -> tuple:
    """Exact matrix-vector product."""
    if len(v) != T.cols:
        raise DimensionError(f"vector of length {len(v)} for an operator with {T.cols} columns")
    out = [ZERO] * T.rows
    for c, x in enumerate(v):
        if not x:
            continue
        for r, a in T._columns[c]:
            out[r] = out[r] + a * x
    return tuple(out)


def apply_l2(T: OperatorSpec, f: StepFunction) -> StepFunction:
    """``[L2, T] f`` : apply ``T`` pointwise, keeping the partition."""
    if f.dimension != T.cols:
        raise DimensionError(f"function of dimension {f.dimension} for an operator with {T.cols} columns")
    vals = tuple(apply(T, v) for v in f.values)
    return StepFunction._raw(f.partition, vals, T.rows)


def adjoint(T: OperatorSpec) -> OperatorSpec:
    """Transpose between the dual spaces (l1 <-> linf, l2 <-> l2)."""
    src, tgt = T.target.dual(), T.source.dual()
    matrix = [[T.matrix[r][c] for r in range(T.rows)] for c in range(T.cols)]
    return OperatorSpec(matrix, src, tgt)


# ---------------------------------------------------------------------------
# named operators


def identity_operator(d: int, space: NormKind = L1) -> OperatorSpec:
    return OperatorSpec([[ONE if r == c else ZERO for c in range(d)] for r in range(d)], space, space)


def zero_operator(rows: int, cols: int, source: NormKind = L1, target: NormKind = L1) -> OperatorSpec:
    return OperatorSpec([[ZERO] * cols for _ in range(rows)], source, target)


def summation_operator(n: int) -> OperatorSpec:
    """Partial sums ``l1^n -> linf^n``: lower-triangular ones."""
    if n < 1:
        raise ValueError("n must be positive")
    return OperatorSpec([[ONE if c <= r else ZERO for c in range(n)] for r in range(n)], L1, LINF)


def diagonal_operator(t: Sequence, d: Optional[int] = None) -> OperatorSpec:
    """``D_t : l1^d -> l1^d`` for a positive non-increasing sequence ``t``."""
    t = [Fraction(x) if not isinstance(x, QuadRational) else x for x in t]
    if d is None:
        d = len(t)
    if len(t) != d:
        raise ValueError(f"need {d} diagonal entries, got {len(t)}")
    if any(x <= 0 for x in t):
        raise ValueError("diagonal entries must be positive")
    if any(b > a for a, b in zip(t, t[1:])):
        raise ValueError("diagonal entries must be non-increasing")
    return OperatorSpec([[as_quad(t[r]) if r == c else ZERO for c in range(d)] for r in range(d)], L1, L1)


def log_weights(n: int, digits: int = 15) -> list:
    """Rational approximations of ``1 / (1 + log k)``, k = 1..n.

    Rounding is monotone, so the result stays non-increasing.  The rounding
    is a display-level approximation; downstream values are exact for these
    rationals, not for the logarithms.
    """
    scale = 10 ** digits
    return [Fraction(round(scale / (1.0 + math.log(k))), scale) for k in range(1, n + 1)]


def lift_operator(T: OperatorSpec, weights: Sequence) -> OperatorSpec:
    """Block-diagonal ``I (x) T`` between weighted l2-sums of source/target.

    Used for [L2, X]-valued coefficient families sampled on a partition with
    cell lengths ``weights``.
    """
    from .stepfn import weighted_l2_sum

    b = len(weights)
    rows, cols = T.rows * b, T.cols * b
    matrix = [[ZERO] * cols for _ in range(rows)]
    for i in range(b):
        for r in range(T.rows):
            for c in range(T.cols):
                matrix[i * T.rows + r][i * T.cols + c] = T.matrix[r][c]
    return OperatorSpec(matrix, weighted_l2_sum(weights, T.source), weighted_l2_sum(weights, T.target))


# ---------------------------------------------------------------------------
# operator norms


@dataclass(frozen=True)
class OperatorNorm:
    """Squared bracket ``lower_sq <= ||T||^2 <= upper_sq``."""

    lower_sq: QuadRational
    upper_sq: QuadRational
    exact: bool
    method: str

    @property
    def lower(self) -> float:
        return self.lower_sq.sqrt_float()

    @property
    def upper(self) -> float:
        return self.upper_sq.sqrt_float()

    @property
    def value(self) -> float:
        return self.upper if self.exact else float("nan")


def _max_sq(values) -> QuadRational:
    best = ZERO
    for v in values:
        if v > best:
            best = v
    return best


def _sign_enum_sq(T: OperatorSpec, target: NormKind) -> QuadRational:
    """max over sign vectors e of ||T e||^2 (exact norm of linf^cols -> target)."""
    best = ZERO
    cols = [T.column(c) for c in range(T.cols)]
    for signs in itertools.product((1, -1), repeat=T.cols - 1):
        v = list(cols[0])
        for s, col in zip(signs, cols[1:]):
            if s > 0:
                v = [a + b for a, b in zip(v, col)]
            else:
                v = [a - b for a, b in zip(v, col)]
        n2 = target.norm_sq(tuple(v))
        if n2 > best:
            best = n2
    return best


def _gram(T: OperatorSpec) -> list:
    cols = [T.column(c) for c in range(T.cols)]
    return [[dot(cols[i], cols[j]) for j in range(T.cols)] for i in range(T.cols)]


def _rational_vector(x: np.ndarray) -> tuple:
    return tuple(QuadRational(Fraction(float(v)).limit_denominator(1 << 24), 0) for v in x)


def _l2_l2_norm(T: OperatorSpec) -> OperatorNorm:
    gram = _gram(T)
    frob = sum((gram[i][i] for i in range(T.cols)), ZERO)
    gersh = _max_sq(sum((abs(x) for x in row), ZERO) for row in gram)
    upper = gersh if gersh < frob else frob
    # witness from power iteration on the float Gram matrix, certified exactly
    A = T.to_float()
    lower = ZERO
    if frob:
        rng = np.random.default_rng(0)
        x = rng.standard_normal(T.cols)
        G = A.T @ A
        for _ in range(200):
            y = G @ x
            ny = np.linalg.norm(y)
            if ny == 0:
                break
            x = y / ny
        v = _rational_vector(x)
        vv = dot(v, v)
        if vv:
            Tv = apply(T, v)
            lower = dot(Tv, Tv) / vv
        for c in range(T.cols):
            col_sq = gram[c][c]
            if col_sq > lower:
                lower = col_sq
    return OperatorNorm(lower, upper, lower == upper, "l2-power-iteration/gershgorin")


def operator_norm(T: OperatorSpec) -> OperatorNorm:
    """Exact norm where it is a finite maximum, otherwise a rigorous bracket."""
    src, tgt = T.source, T.target
    if src.tag == "l1":
        v = _max_sq(tgt.norm_sq(T.column(c)) for c in range(T.cols))
        return OperatorNorm(v, v, True, "l1-source: max column norm")
    if tgt.tag == "linf" and src.tag in ("l2", "linf"):
        dual = src.dual()
        v = _max_sq(dual.norm_sq(row) for row in T.matrix)
        return OperatorNorm(v, v, True, "linf-target: max row dual norm")
    if src.tag == "linf" and tgt.tag in ("l1", "l2") and T.cols <= SIGN_ENUM_MAX_DIM:
        v = _sign_enum_sq(T, tgt)
        return OperatorNorm(v, v, True, "linf-source: sign-vector enumeration")
    if src.tag == "l2" and tgt.tag == "l1" and T.rows <= SIGN_ENUM_MAX_DIM:
        v = _sign_enum_sq(adjoint(T), L2)
        return OperatorNorm(v, v, True, "l2->l1 via adjoint sign enumeration")
    if src.tag == "l2" and tgt.tag == "l2":
        return _l2_l2_norm(T)
    # generic bracket: basis vectors from below, l1 comparison from above
    col_sq = [tgt.norm_sq(T.column(c)) for c in range(T.cols)]
    best = ZERO
    for c, v in enumerate(col_sq):
        e = [ZERO] * T.cols
        e[c] = ONE
        s = src.norm_sq(tuple(e))
        if s:
            r = v / s
            if r > best:
                best = r
    upper = _max_sq(col_sq) * src.l1_comparison_sq(T.cols)
    return OperatorNorm(best, upper, best == upper, "generic: l1 comparison bracket")
