"""Explicit witness families with known ratios."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from ..haar import DEFAULT_LEVEL_CAP, HaarCoefficients, analyze, check_level, haar_scale, tree
from ..scalars import ONE, ZERO, QuadRational, as_quad
from ..stepfn import StepFunction, dyadic_partition

__all__ = [
    "summation_witness_function",
    "summation_cotype_witness",
    "diagonal_type_witness",
    "diagonal_type_exact",
    "DiagonalValue",
    "conjugate_exponent",
]


def conjugate_exponent(p) -> Fraction:
    p = Fraction(p)
    if not 1 < p <= 2:
        raise ValueError("p must lie in (1, 2]")
    return p / (p - 1)


def summation_witness_function(n: int, cap: int = DEFAULT_LEVEL_CAP) -> StepFunction:
    """``f(t) = e_i`` on the i-th level-n dyadic interval, valued in l1^(2**n)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    check_level(n, cap)
    N = 1 << n
    vals = []
    for i in range(N):
        v = [ZERO] * N
        v[i] = ONE
        vals.append(tuple(v))
    return StepFunction(dyadic_partition(n), vals, N)


def summation_cotype_witness(n: int, cap: int = DEFAULT_LEVEL_CAP) -> HaarCoefficients:
    """Haar coefficients of :func:`summation_witness_function` over D_0^n.

    Against the summation operator on l1^(2**n) -> linf^(2**n) every level
    ``k >= 1`` coefficient has image norm ``2**(-(k+1)/2)``, the level-0
    coefficient has image norm 1, and ``||f||_{L2} = 1``, so the squared
    cotype ratio is ``1 + n/4``.
    """
    return analyze(summation_witness_function(n, cap), 0, n, cap)


def _level_weights(t: Sequence, n: int, p) -> list:
    if len(t) < n:
        raise ValueError(f"need at least {n} diagonal entries, got {len(t)}")
    p = Fraction(p)
    if p == 2:
        return [as_quad(x) for x in t[:n]]
    q = conjugate_exponent(p)
    # Hoelder equality case: a_k proportional to tau_k^(q-1); irrational, so rounded
    return [QuadRational(Fraction(float(x) ** float(q - 1)).limit_denominator(10 ** 12), 0) for x in t[:n]]


def diagonal_type_witness(t: Sequence, n: int, p=2, m: int = 1) -> HaarCoefficients:
    """Coefficients ``x_k^(j) = a_k 2**(-(k-1)/2) e_k`` on the tree D_m^n (m in {0, 1}).

    All indices of level ``k`` share the basis vector ``e_k``; the Haar
    functions of one level have disjoint supports, so ``||f(t)||_1`` is the
    constant ``sum_k a_k tau_k`` under ``D_t`` while the level-k L_p norm is
    ``a_k``.  With ``a_k = tau_k`` (p = 2) the squared type ratio is
    ``sum_k tau_k^2``; for other p the Hoelder-optimal ``a_k = tau_k^(p'-1)``
    is rounded to a rational.  The dimension is ``len(t)``.
    """
    if m not in (0, 1):
        raise ValueError("the diagonal witness lives on D_0^n or D_1^n")
    if n < 1:
        raise ValueError("n must be at least 1")
    d = len(t)
    a = _level_weights(t, n, p)
    coeffs = {}
    for k, j in tree(m, n, cap=max(n, DEFAULT_LEVEL_CAP)):
        v = [ZERO] * d
        if k >= 1:
            v[k - 1] = a[k - 1] / haar_scale(k)
        coeffs[(k, j)] = tuple(v)
    return HaarCoefficients(m, n, d, coeffs)


@dataclass(frozen=True)
class DiagonalValue:
    """Closed-form Haar type p norm of a diagonal operator on D_1^n."""

    value: float
    squared: Optional[QuadRational]


def diagonal_type_exact(t: Sequence, n: int, p=2) -> DiagonalValue:
    """``(sum_{k<=n} tau_k^p')^(1/p')``; exact squared value when p = 2."""
    if len(t) < n:
        raise ValueError(f"need at least {n} diagonal entries, got {len(t)}")
    p = Fraction(p)
    q = conjugate_exponent(p)
    if p == 2:
        sq = sum((as_quad(x) * as_quad(x) for x in t[:n]), ZERO)
        return DiagonalValue(sq.sqrt_float(), sq)
    qf = float(q)
    val = math.fsum(abs(float(x)) ** qf for x in t[:n]) ** (1.0 / qf)
    return DiagonalValue(val, None)
