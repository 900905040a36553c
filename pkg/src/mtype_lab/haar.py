"""Haar functions on dyadic trees; analysis and synthesis of Haar polynomials.

Indices follow the usual convention: ``(k, j)`` with level ``k >= 1`` and
``1 <= j <= 2**(k-1)``, plus the constant ``(0, 0)``.  The function at
``(k, j)`` is ``+-2**((k-1)/2)`` on the two halves of the dyadic interval
``[(j-1)/2**(k-1), j/2**(k-1))``, so the system is orthonormal in L2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionError, LevelCapError
from .scalars import ONE, ZERO, QuadRational, as_quad
from .stepfn import IntervalPartition, StepFunction, dyadic_partition, vec_add, vec_scale, vec_sub

__all__ = [
    "DEFAULT_LEVEL_CAP",
    "TreeIndex",
    "HaarCoefficients",
    "check_level",
    "haar_fn",
    "haar_scale",
    "tree",
    "analyze",
    "synthesize",
    "synthesis_matrix",
]

DEFAULT_LEVEL_CAP = 12

TreeIndex = Tuple[int, int]


def check_level(n: int, cap: int = DEFAULT_LEVEL_CAP) -> None:
    if n > cap:
        raise LevelCapError(f"level {n} exceeds the configured cap {cap}")


def _check_index(k: int, j: int) -> None:
    if k == 0:
        if j != 0:
            raise ValueError("the only level-0 index is (0, 0)")
        return
    if k < 0 or not 1 <= j <= 1 << (k - 1):
        raise ValueError(f"invalid tree index ({k}, {j})")


def haar_scale(k: int) -> QuadRational:
    """Height ``2**((k-1)/2)`` of the level-``k`` Haar function (1 at level 0)."""
    return ONE if k == 0 else QuadRational.sqrt2_power(k - 1)


def haar_fn(k: int, j: int) -> StepFunction:
    _check_index(k, j)
    if k == 0:
        return StepFunction.constant((ONE,))
    h = haar_scale(k)
    width = Fraction(1, 1 << (k - 1))
    lo = (j - 1) * width
    mid, hi = lo + width / 2, lo + width
    bps, vals = [], []
    if lo > 0:
        bps.append(Fraction(0))
        vals.append((ZERO,))
    bps += [lo, mid]
    vals += [(h,), (-h,)]
    if hi < 1:
        bps.append(hi)
        vals.append((ZERO,))
    bps.append(Fraction(1))
    return StepFunction(IntervalPartition(bps), vals, 1)


def tree(m: int, n: int, cap: int = DEFAULT_LEVEL_CAP) -> List[TreeIndex]:
    """The index set D_m^n in level-major order; D_0^n includes (0, 0)."""
    if m < 0 or m > n:
        raise ValueError(f"need 0 <= m <= n, got m={m}, n={n}")
    check_level(n, cap)
    out: List[TreeIndex] = [(0, 0)] if m == 0 else []
    for k in range(max(m, 1), n + 1):
        out.extend((k, j) for j in range(1, (1 << (k - 1)) + 1))
    return out


@dataclass
class HaarCoefficients:
    """Coefficient vectors indexed by a dyadic tree D_m^n."""

    m: int
    n: int
    dimension: int
    coeffs: Dict[TreeIndex, tuple] = field(default_factory=dict)

    def __post_init__(self):
        if self.dimension < 1:
            raise DimensionError("the zero-dimensional space is not supported")
        idx = tree(self.m, self.n, cap=max(self.n, DEFAULT_LEVEL_CAP))
        zero = (ZERO,) * self.dimension
        clean = {}
        for key in idx:
            v = self.coeffs.get(key, zero)
            v = tuple(as_quad(x) for x in v)
            if len(v) != self.dimension:
                raise DimensionError(f"coefficient {key} has length {len(v)}, expected {self.dimension}")
            clean[key] = v
        extra = set(self.coeffs) - set(clean)
        if extra:
            raise ValueError(f"indices outside D_{self.m}^{self.n}: {sorted(extra)}")
        self.coeffs = clean

    @property
    def indices(self) -> List[TreeIndex]:
        return list(self.coeffs)

    def levels(self) -> range:
        return range(self.m, self.n + 1) if self.m > 0 else range(0, self.n + 1)

    def __getitem__(self, key: TreeIndex) -> tuple:
        return self.coeffs[key]

    def map(self, fn, dimension: Optional[int] = None) -> "HaarCoefficients":
        new = {k: tuple(fn(v)) for k, v in self.coeffs.items()}
        dim = dimension if dimension is not None else len(next(iter(new.values())))
        return HaarCoefficients(self.m, self.n, dim, new)

    def is_zero(self) -> bool:
        return not any(x for v in self.coeffs.values() for x in v)

    def to_float(self) -> np.ndarray:
        return np.array([[float(x) for x in v] for v in self.coeffs.values()], dtype=float)

    def __eq__(self, other):
        if not isinstance(other, HaarCoefficients):
            return NotImplemented
        return (self.m, self.n, self.dimension, self.coeffs) == (other.m, other.n, other.dimension, other.coeffs)

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "dimension": self.dimension,
            "coeffs": {f"{k},{j}": [x.to_json() for x in v] for (k, j), v in self.coeffs.items()},
        }

    @classmethod
    def from_json(cls, obj) -> "HaarCoefficients":
        for key in ("m", "n", "dimension", "coeffs"):
            if key not in obj:
                raise ValueError(f"Haar coefficients are missing field {key!r}")
        coeffs = {}
        for key, vec in obj["coeffs"].items():
            k, j = (int(s) for s in key.split(","))
            coeffs[(k, j)] = tuple(QuadRational.from_json(x) for x in vec)
        return cls(int(obj["m"]), int(obj["n"]), int(obj["dimension"]), coeffs)


def _dyadic_integrals(f: StepFunction, n: int) -> list:
    """Integrals of ``f`` over the 2**n level-n dyadic cells."""
    N = 1 << n
    P = f.partition.union(dyadic_partition(n))
    g = f.refine(P)
    out = []
    bps = g.breakpoints
    i = 0
    zero = (ZERO,) * f.dimension
    for c in range(N):
        hi = Fraction(c + 1, N)
        acc = zero
        while i < len(g.values) and bps[i] < hi:
            v = g.values[i]
            if any(v):
                acc = vec_add(acc, vec_scale(bps[i + 1] - bps[i], v))
            i += 1
        out.append(acc)
    return out


def analyze(f: StepFunction, m: int, n: int, cap: int = DEFAULT_LEVEL_CAP) -> HaarCoefficients:
    """Haar coefficients ``x_k^(j) = int f chi_k^(j)`` over D_m^n."""
    check_level(n, cap)
    integrals = _dyadic_integrals(f, n)
    # bottom-up sums over the dyadic intervals of each level
    sums = {n: integrals}
    for k in range(n - 1, -1, -1):
        below = sums[k + 1]
        sums[k] = [vec_add(below[2 * i], below[2 * i + 1]) for i in range(1 << k)]
    coeffs = {}
    for k, j in tree(m, n, cap):
        if k == 0:
            coeffs[(0, 0)] = sums[0][0]
            continue
        left, right = sums[k][2 * j - 2], sums[k][2 * j - 1]
        coeffs[(k, j)] = vec_scale(haar_scale(k), vec_sub(left, right))
    return HaarCoefficients(m, n, f.dimension, coeffs)


def synthesize(c: HaarCoefficients) -> StepFunction:
    """The Haar polynomial ``sum x_k^(j) chi_k^(j)`` on the level-n dyadic partition."""
    n, d = c.n, c.dimension
    N = 1 << n
    zero = (ZERO,) * d
    values = [zero] * N
    for (k, j), x in c.coeffs.items():
        if not any(x):
            continue
        if k == 0:
            values = [vec_add(v, x) for v in values]
            continue
        hx = vec_scale(haar_scale(k), x)
        block = N >> (k - 1)
        start = (j - 1) * block
        half = block // 2
        for i in range(start, start + half):
            values[i] = vec_add(values[i], hx)
        for i in range(start + half, start + block):
            values[i] = vec_sub(values[i], hx)
    return StepFunction._raw(dyadic_partition(n), tuple(values), d)


def synthesis_matrix(m: int, n: int) -> np.ndarray:
    """Float matrix ``H`` with ``H[cell, idx] = chi_idx`` on level-n cell ``cell``."""
    idx = tree(m, n, cap=max(n, DEFAULT_LEVEL_CAP))
    N = 1 << n
    H = np.zeros((N, len(idx)))
    for col, (k, j) in enumerate(idx):
        if k == 0:
            H[:, col] = 1.0
            continue
        h = 2.0 ** ((k - 1) / 2)
        block = N >> (k - 1)
        start = (j - 1) * block
        H[start:start + block // 2, col] = h
        H[start + block // 2:start + block, col] = -h
    return H
