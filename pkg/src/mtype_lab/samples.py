"""Seeded random instances with exact values.

All generators take a ``numpy.random.Generator`` so that streams can be
split deterministically (``np.random.default_rng([seed, i])``).
"""

from __future__ import annotations

from fractions import Fraction
from typing import List, Sequence

import numpy as np

from .haar import HaarCoefficients, tree
from .martingales import MDS, Filtration
from .operators import OperatorSpec
from .scalars import ZERO, QuadRational
from .stepfn import (
    L1,
    IntervalPartition,
    NormKind,
    StepFunction,
    conditional_expectation,
)

__all__ = [
    "random_rational",
    "random_scalar",
    "random_vector",
    "random_partition",
    "random_step_function",
    "random_refinement",
    "random_mds",
    "random_haar_coeffs",
    "random_operator",
    "rational_sphere_point",
    "unit_difference_mds",
]


def random_rational(rng: np.random.Generator, bound: int = 5, denom: int = 6) -> Fraction:
    q = int(rng.integers(1, denom + 1))
    return Fraction(int(rng.integers(-bound * q, bound * q + 1)), q)


def random_scalar(rng, quad: bool = False, bound: int = 5, denom: int = 6) -> QuadRational:
    b = random_rational(rng, bound, denom) if quad and rng.random() < 0.5 else 0
    return QuadRational(random_rational(rng, bound, denom), b)


def random_vector(rng, d: int, quad: bool = False, zero_prob: float = 0.2) -> tuple:
    return tuple(ZERO if rng.random() < zero_prob else random_scalar(rng, quad) for _ in range(d))


def _split_points(rng, lo: Fraction, hi: Fraction, count: int, denom: int) -> List[Fraction]:
    pts = set()
    for _ in range(count):
        u = Fraction(int(rng.integers(1, denom)), denom)
        pts.add(lo + (hi - lo) * u)
    return sorted(pts)


def random_partition(rng, cells: int = 3, denom: int = 7) -> IntervalPartition:
    inner = _split_points(rng, Fraction(0), Fraction(1), max(cells - 1, 0), denom)
    return IntervalPartition([Fraction(0)] + inner + [Fraction(1)])


def random_refinement(rng, P: IntervalPartition, max_splits: int = 2, denom: int = 5) -> IntervalPartition:
    """Split each cell of ``P`` at up to ``max_splits`` random rational points (at least one overall)."""
    pts = list(P.breakpoints)
    for lo, hi in P.cells():
        pts += _split_points(rng, lo, hi, int(rng.integers(0, max_splits + 1)), denom)
    if len(set(pts)) == len(P.breakpoints):
        lo, hi = P.cells()[int(rng.integers(0, P.cell_count))]
        pts.append((lo + hi) / 2)
    return IntervalPartition(sorted(set(pts)))


def random_step_function(rng, d: int, cells: int = 4, quad: bool = False) -> StepFunction:
    P = random_partition(rng, cells)
    return StepFunction(P, [random_vector(rng, d, quad) for _ in range(P.cell_count)], d)


def random_mds(rng, n: int, d: int, quad: bool = False, initial_cells: int = 1,
               max_splits: int = 2) -> MDS:
    """``d_k = h_k - E_{k-1} h_k`` with ``h_k`` random on a random refinement ``F_k``."""
    F0 = random_partition(rng, initial_cells) if initial_cells > 1 else IntervalPartition.trivial()
    parts = [F0]
    diffs = []
    for _ in range(n):
        Fk = random_refinement(rng, parts[-1], max_splits)
        h = StepFunction(Fk, [random_vector(rng, d, quad) for _ in range(Fk.cell_count)], d)
        diffs.append(h - conditional_expectation(h, parts[-1]))
        parts.append(Fk)
    return MDS(tuple(diffs), Filtration(tuple(parts)))


def random_haar_coeffs(rng, m: int, n: int, d: int, quad: bool = False) -> HaarCoefficients:
    return HaarCoefficients(m, n, d, {key: random_vector(rng, d, quad) for key in tree(m, n)})


def random_operator(rng, rows: int, cols: int, source: NormKind = L1, target: NormKind = L1,
                    quad: bool = False) -> OperatorSpec:
    return OperatorSpec([random_vector(rng, cols, quad) for _ in range(rows)], source, target)


def rational_sphere_point(rng, n: int, bound: int = 3, denom: int = 4) -> List[Fraction]:
    """A rational point on the unit sphere in R^n (inverse stereographic projection)."""
    if n == 1:
        return [Fraction(1)]
    y = [random_rational(rng, bound, denom) for _ in range(n - 1)]
    s = sum(v * v for v in y)
    return [2 * v / (1 + s) for v in y] + [(1 - s) / (1 + s)]


def unit_difference_mds(rng, d: int, scales: Sequence, initial_cells: int = 2) -> MDS:
    """Martingale whose k-th difference has L2 norm exactly ``|scales[k]|`` in any l_p norm.

    Every cell of ``F_{k-1}`` is halved; ``d_k`` takes the values ``+-s_k e_i``
    on the two halves for a random signed basis vector ``e_i`` per cell.
    """
    F0 = random_partition(rng, initial_cells) if initial_cells > 1 else IntervalPartition.trivial()
    parts = [F0]
    diffs = []
    for s in scales:
        prev = parts[-1]
        bps = []
        vals = []
        for lo, hi in prev.cells():
            i = int(rng.integers(0, d))
            sign = 1 if rng.random() < 0.5 else -1
            v = [ZERO] * d
            v[i] = QuadRational(sign, 0) * s
            v = tuple(v)
            bps += [lo, (lo + hi) / 2]
            vals += [v, tuple(-x for x in v)]
        bps.append(Fraction(1))
        Fk = IntervalPartition(bps)
        diffs.append(StepFunction(Fk, vals, d))
        parts.append(Fk)
    return MDS(tuple(diffs), Filtration(tuple(parts)))
