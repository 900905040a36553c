"""Exact ratio evaluators for the type/cotype inequalities.

Each evaluator returns the squared numerator and denominator of the
defining inequality for one witness; the square root of their quotient is
a certified lower bound for the corresponding ideal norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from ..errors import DegenerateWitnessError, DimensionError, MartingaleError
from ..haar import HaarCoefficients, synthesize
from ..martingales import MDS, from_haar_coeffs, validate
from ..operators import OperatorSpec, apply, apply_l2
from ..scalars import ZERO, QuadRational
from ..stepfn import NormKind, StepFunction, l2_norm_sq

__all__ = ["Ratio", "haar_ratio", "martingale_ratio", "type_p_ratio", "lp_norm_float"]

HAAR_DIRECTIONS = ("type", "cotype")
MARTINGALE_VARIANTS = ("type", "cotype", "equal_norm", "equal_norm_sup")


@dataclass(frozen=True)
class Ratio:
    num_sq: QuadRational
    den_sq: QuadRational

    def __post_init__(self):
        if not self.den_sq:
            raise DegenerateWitnessError("zero denominator: the witness is degenerate")

    @property
    def sq(self) -> QuadRational:
        return self.num_sq / self.den_sq

    @property
    def value(self) -> float:
        return self.sq.sqrt_float()

    def to_json(self) -> dict:
        return {"num_sq": self.num_sq.to_json(), "den_sq": self.den_sq.to_json(), "value": self.value}


def _check_dims(T: OperatorSpec, d: int) -> None:
    if T.cols != d:
        raise DimensionError(f"operator has {T.cols} columns, witness has dimension {d}")


def haar_ratio(T: OperatorSpec, c: HaarCoefficients, direction: str = "type") -> Ratio:
    """Squared ratio for one coefficient family.

    type:   ||sum T x_k^(j) chi_k^(j)||^2_{L2}  /  sum ||x_k^(j)||^2
    cotype: sum ||T x_k^(j)||^2  /  ||sum x_k^(j) chi_k^(j)||^2_{L2}
    """
    if direction not in HAAR_DIRECTIONS:
        raise ValueError(f"direction must be one of {HAAR_DIRECTIONS}")
    _check_dims(T, c.dimension)
    src, tgt = T.source, T.target
    Tc = c.map(lambda x: apply(T, x), T.rows)
    if direction == "type":
        num = l2_norm_sq(synthesize(Tc), tgt)
        den = sum((src.norm_sq(x) for x in c.coeffs.values()), ZERO)
    else:
        num = sum((tgt.norm_sq(y) for y in Tc.coeffs.values()), ZERO)
        den = l2_norm_sq(synthesize(c), src)
    return Ratio(num, den)


def _sum(fs) -> StepFunction:
    s = fs[0]
    for f in fs[1:]:
        s = s + f
    return s


def martingale_ratio(T: OperatorSpec, m: MDS, variant: str = "type", check: bool = True) -> Ratio:
    """Squared ratio for one martingale difference sequence.

    ``equal_norm`` is the type ratio restricted to equal-norm sequences and
    raises otherwise; ``equal_norm_sup`` replaces the denominator by
    ``n * max ||d_k||^2``.
    """
    if variant not in MARTINGALE_VARIANTS:
        raise ValueError(f"variant must be one of {MARTINGALE_VARIANTS}")
    _check_dims(T, m.dimension)
    if check:
        report = validate(m)
        if not report:
            raise MartingaleError("invalid martingale difference sequence: " + "; ".join(report.violations))
    src, tgt = T.source, T.target
    Td = [apply_l2(T, d) for d in m.differences]
    norms = m.norms_sq(src)
    if variant == "cotype":
        num = sum((l2_norm_sq(f, tgt) for f in Td), ZERO)
        return Ratio(num, l2_norm_sq(m.total(), src))
    num = l2_norm_sq(_sum(Td), tgt)
    if variant == "type":
        return Ratio(num, sum(norms, ZERO))
    if variant == "equal_norm":
        if any(x != norms[0] for x in norms):
            raise MartingaleError("equal_norm requires differences of exactly equal L2 norm")
        return Ratio(num, len(norms) * norms[0])
    top = ZERO
    for x in norms:
        if x > top:
            top = x
    return Ratio(num, len(norms) * top)


def _norm_float(v, norm: NormKind) -> float:
    if norm.tag in ("l1", "linf"):
        return float(norm.norm(v))
    return norm.norm_sq(v).sqrt_float()


def lp_norm_float(f: StepFunction, norm: NormKind, p) -> float:
    """``(int ||f(t)||^p dt)^(1/p)`` in floating point."""
    p = float(p)
    terms = [float(length) * _norm_float(v, norm) ** p for length, v in zip(f.partition.lengths(), f.values)]
    return math.fsum(terms) ** (1.0 / p)


def type_p_ratio(T: OperatorSpec, c: HaarCoefficients, p) -> float:
    """Ratio for the Haar type p inequality over D_m^n with m >= 1.

    numerator:   ||sum T x_k^(j) chi_k^(j)||_{L_p}
    denominator: (sum_k ||sum_j x_k^(j) chi_k^(j)||_{L_p}^p)^(1/p)
    """
    p = Fraction(p)
    if not 1 < p <= 2:
        raise ValueError("p must lie in (1, 2]")
    if c.m < 1:
        raise ValueError("the Haar type p ratio is defined on trees D_m^n with m >= 1")
    _check_dims(T, c.dimension)
    pf = float(p)
    Tc = c.map(lambda x: apply(T, x), T.rows)
    num = lp_norm_float(synthesize(Tc), T.target, p)
    levels = from_haar_coeffs(c).differences
    den = math.fsum(lp_norm_float(d, T.source, p) ** pf for d in levels) ** (1.0 / pf)
    if den == 0:
        raise DegenerateWitnessError("zero denominator: the witness is degenerate")
    return num / den
