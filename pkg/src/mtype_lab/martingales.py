"""Martingale difference sequences over interval filtrations.

Besides validation this module implements the three transformations used
to move between martingale problems of different length:

* :func:`glue` places ``mod`` compressed copies of a martingale side by side,
  producing ``mod * n`` differences with ``1/mod`` of the squared norm each
  and the same total sum norm;
* :func:`equalize` blocks a glued equal-norm martingale of length ``n`` into
  ``n + 1`` differences of equal norm;
* :func:`normalize_mds` buckets differences by size and regroups the glued
  copies so that every new difference has squared norm in ``(1/mod, 4/mod]``.

:func:`mds_to_cotype_instance` turns a martingale of length ``2**n`` into a
Haar coefficient family with values in [L2, X].
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import DimensionError, MartingaleError
from .haar import HaarCoefficients, analyze, haar_scale, tree
from .operators import OperatorSpec, apply, apply_l2
from .scalars import ZERO, QuadRational
from .stepfn import (
    IntervalPartition,
    NormKind,
    StepFunction,
    conditional_expectation,
    dyadic_partition,
    l2_norm_sq,
    vec_scale,
    weighted_l2_sum,
)

__all__ = [
    "Filtration",
    "MDS",
    "ValidationReport",
    "validate",
    "from_haar_coeffs",
    "glue",
    "block",
    "equalize",
    "normalize_mds",
    "NormalizationResult",
    "CotypeInstance",
    "mds_to_cotype_instance",
    "cotype_instance_identities",
    "pad",
    "subsequence",
    "transport_many",
]


@dataclass(frozen=True)
class Filtration:
    """Partitions ``F_0, F_1, ..., F_n``, each refining its predecessor."""

    partitions: Tuple[IntervalPartition, ...]

    def __post_init__(self):
        object.__setattr__(self, "partitions", tuple(self.partitions))
        if not self.partitions:
            raise MartingaleError("a filtration needs at least F_0")

    def __len__(self):
        return len(self.partitions)

    def __getitem__(self, k) -> IntervalPartition:
        return self.partitions[k]

    def is_increasing(self) -> bool:
        return all(b.refines(a) for a, b in zip(self.partitions, self.partitions[1:]))

    def to_json(self) -> list:
        return [p.to_json() for p in self.partitions]

    @classmethod
    def from_json(cls, obj) -> "Filtration":
        return cls(tuple(IntervalPartition.from_json(p) for p in obj))


@dataclass(frozen=True)
class MDS:
    """Differences ``d_1..d_n`` with ``d_k`` measurable for ``F_k`` and ``E_{k-1} d_k = 0``."""

    differences: Tuple[StepFunction, ...]
    filtration: Filtration

    def __post_init__(self):
        object.__setattr__(self, "differences", tuple(self.differences))
        if not self.differences:
            raise MartingaleError("a martingale difference sequence needs at least one difference")
        dims = {d.dimension for d in self.differences}
        if len(dims) != 1:
            raise DimensionError(f"differences have mixed dimensions {sorted(dims)}")
        if len(self.filtration) != len(self.differences) + 1:
            raise MartingaleError(
                f"{len(self.differences)} differences need {len(self.differences) + 1} partitions, "
                f"got {len(self.filtration)}")

    @property
    def dimension(self) -> int:
        return self.differences[0].dimension

    def __len__(self):
        return len(self.differences)

    def total(self) -> StepFunction:
        s = self.differences[0]
        for d in self.differences[1:]:
            s = s + d
        return s

    def norms_sq(self, norm: NormKind) -> List[QuadRational]:
        return [l2_norm_sq(d, norm) for d in self.differences]

    def mapped(self, T: OperatorSpec) -> "MDS":
        """``([L2, T] d_k)``, again a martingale difference sequence."""
        return MDS(tuple(apply_l2(T, d) for d in self.differences), self.filtration)

    def scaled(self, s) -> "MDS":
        return MDS(tuple(d.scale(s) for d in self.differences), self.filtration)

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension,
            "filtration": self.filtration.to_json(),
            "differences": [d.to_json() for d in self.differences],
        }

    @classmethod
    def from_json(cls, obj) -> "MDS":
        for key in ("filtration", "differences"):
            if key not in obj:
                raise ValueError(f"MDS is missing field {key!r}")
        diffs = tuple(StepFunction.from_json(d) for d in obj["differences"])
        m = cls(diffs, Filtration.from_json(obj["filtration"]))
        if "dimension" in obj and int(obj["dimension"]) != m.dimension:
            raise DimensionError("declared dimension does not match the differences")
        return m


@dataclass
class ValidationReport:
    valid: bool
    violations: List[str] = field(default_factory=list)

    def __bool__(self):
        return self.valid


def validate(m: MDS) -> ValidationReport:
    """Check filtration monotonicity, adaptedness and the martingale property exactly."""
    bad = []
    parts = m.filtration.partitions
    for k in range(1, len(parts)):
        if not parts[k].refines(parts[k - 1]):
            bad.append(f"F_{k} does not refine F_{k - 1}")
    for k, d in enumerate(m.differences, start=1):
        canon = d.canonical()
        if not parts[k].refines(canon.partition):
            bad.append(f"d_{k} is not measurable for F_{k}")
        if not conditional_expectation(d, parts[k - 1]).is_zero():
            bad.append(f"E_{k - 1} d_{k} != 0")
    return ValidationReport(not bad, bad)


# ---------------------------------------------------------------------------
# dyadic martingales


def from_haar_coeffs(c: HaarCoefficients) -> MDS:
    """``d_k = sum_j x_k^(j) chi_k^(j)`` for the levels ``max(m, 1)..n``.

    A level-0 coefficient is the initial constant of the martingale and is
    not a difference, so it is dropped.
    """
    first = max(c.m, 1)
    if c.n < first:
        raise MartingaleError("the tree has no level >= 1")
    diffs = []
    for k in range(first, c.n + 1):
        h = haar_scale(k)
        vals = []
        for i in range(1 << k):
            x = c.coeffs[(k, i // 2 + 1)]
            hx = vec_scale(h, x)
            vals.append(hx if i % 2 == 0 else tuple(-v for v in hx))
        diffs.append(StepFunction._raw(dyadic_partition(k), tuple(vals), c.dimension))
    filt = Filtration(tuple(dyadic_partition(k) for k in range(first - 1, c.n + 1)))
    return MDS(tuple(diffs), filt)


def pad(m: MDS, length: int) -> MDS:
    """Append zero differences (repeating the last partition) up to ``length``."""
    if length < len(m):
        raise ValueError("cannot pad to a shorter length")
    extra = length - len(m)
    if not extra:
        return m
    zero = StepFunction.zero(m.dimension)
    last = m.filtration.partitions[-1]
    return MDS(m.differences + (zero,) * extra,
               Filtration(m.filtration.partitions + (last,) * extra))


def subsequence(m: MDS, keep: Sequence[int]) -> MDS:
    """Differences with 1-based indices in ``keep`` (increasing), with the matching sub-filtration."""
    keep = sorted(keep)
    if not keep:
        raise MartingaleError("empty subsequence")
    parts = (m.filtration.partitions[0],) + tuple(m.filtration.partitions[k] for k in keep)
    return MDS(tuple(m.differences[k - 1] for k in keep), Filtration(parts))


# ---------------------------------------------------------------------------
# glueing and blocking


def transport_many(f: StepFunction, blocks: Sequence[int], mod: int) -> StepFunction:
    """``sum_{j in blocks} Phi_j^mod f`` built in one pass (supports are disjoint)."""
    chosen = set(blocks)
    if not chosen <= set(range(1, mod + 1)):
        raise ValueError("block index out of range")
    zero = (ZERO,) * f.dimension
    bps, vals = [], []
    for j in range(1, mod + 1):
        lo = Fraction(j - 1, mod)
        if j in chosen:
            bps.extend(lo + s / mod for s in f.breakpoints[:-1])
            vals.extend(f.values)
        else:
            bps.append(lo)
            vals.append(zero)
    bps.append(Fraction(1))
    return StepFunction._raw(IntervalPartition(bps), tuple(vals), f.dimension)


class _Glued:
    """Lazy description of the glued martingale of ``m`` with ``mod`` blocks."""

    def __init__(self, m: MDS, mod: int):
        if mod < 1:
            raise ValueError("mod must be positive")
        self.m = m
        self.mod = mod
        # block_bps[k][j-1]: breakpoints of F_k compressed into block j
        self.block_bps = [
            [frozenset(Fraction(j - 1, mod) + s / mod for s in P.breakpoints) for j in range(1, mod + 1)]
            for P in m.filtration.partitions
        ]

    def partition(self, k: int, j: int) -> IntervalPartition:
        """Partition after ``Phi_j d_k``; ``(k, j) = (0, mod)`` gives the initial one."""
        pts = set()
        for jj in range(1, self.mod + 1):
            pts |= self.block_bps[k if jj <= j else k - 1][jj - 1]
        return IntervalPartition(sorted(pts))

    def initial(self) -> IntervalPartition:
        return self.partition(0, self.mod)


def glue(m: MDS, mod: int) -> MDS:
    """Order ``Phi_1 d_1, ..., Phi_mod d_1, Phi_1 d_2, ...`` with the glued filtration."""
    if mod == 1:
        return m
    g = _Glued(m, mod)
    diffs, parts = [], [g.initial()]
    for k, d in enumerate(m.differences, start=1):
        for j in range(1, mod + 1):
            diffs.append(transport_many(d, [j], mod))
            parts.append(g.partition(k, j))
    return MDS(tuple(diffs), Filtration(tuple(parts)))


def block(m: MDS, sizes: Sequence[int]) -> MDS:
    """Sum consecutive groups of differences; keep the partition at each group's end."""
    if any(s < 1 for s in sizes) or sum(sizes) != len(m):
        raise ValueError(f"block sizes {list(sizes)} do not cover {len(m)} differences")
    diffs, parts = [], [m.filtration.partitions[0]]
    pos = 0
    for s in sizes:
        acc = m.differences[pos]
        for d in m.differences[pos + 1:pos + s]:
            acc = acc + d
        pos += s
        diffs.append(acc)
        parts.append(m.filtration.partitions[pos])
    return MDS(tuple(diffs), Filtration(tuple(parts)))


def _require_equal_norms(m: MDS, norm: NormKind) -> QuadRational:
    norms = m.norms_sq(norm)
    if any(x != norms[0] for x in norms):
        raise MartingaleError("differences do not have equal L2 norms")
    return norms[0]


def equalize(m: MDS, norm: NormKind) -> MDS:
    """Length ``n`` equal-norm martingale -> length ``n + 1``, norms scaled by ``n/(n+1)``.

    Glue ``n + 1`` copies and block ``n`` consecutive glued differences, so
    block ``h`` collects ``Phi_{n-h+3..n+1} d_{h-1}`` and ``Phi_{1..n-h+1} d_h``.
    """
    _require_equal_norms(m, norm)
    n = len(m)
    return block(glue(m, n + 1), [n] * (n + 1))


@dataclass
class NormalizationResult:
    bucketed: MDS
    mod: int
    levels: int
    buckets: Dict[int, List[int]]
    discarded: List[int]
    discarded_norm_sq: QuadRational
    origin: List[Tuple[int, int]]
    kept_sum_norm_sq: Optional[QuadRational] = None
    discarded_sum_norm_sq: Optional[QuadRational] = None


def normalize_mds(m: MDS, T: OperatorSpec) -> NormalizationResult:
    """Bucket by size and regroup glued copies into near-equal differences.

    With ``sum ||d_k||^2 = 1`` and ``4**l <= 16 n < 4**(l+1)``, ``mod = 4**l``:
    index ``k`` lands in bucket ``h`` (``1 <= h <= l``) when
    ``4**-h < ||d_k||^2 <= 4 * 4**-h``, and its ``mod`` glued copies are summed
    in groups of ``4**h``.  Indices in no bucket are returned, not dropped
    silently.  ``origin[i] = (k, group)`` locates each new difference.
    """
    norm = T.source
    norms = m.norms_sq(norm)
    total = sum(norms, ZERO)
    if total != 1:
        raise MartingaleError(f"sum of squared norms must be exactly 1, got {total}")
    n = len(m)
    levels = 0
    while 4 ** (levels + 1) <= 16 * n:
        levels += 1
    mod = 4 ** levels
    buckets: Dict[int, List[int]] = {h: [] for h in range(1, levels + 1)}
    discarded = []
    for k, x in enumerate(norms, start=1):
        for h in range(1, levels + 1):
            if Fraction(1, 4 ** h) < x <= Fraction(4, 4 ** h):
                buckets[h].append(k)
                break
        else:
            discarded.append(k)
    bucket_of = {k: h for h, ks in buckets.items() for k in ks}
    kept = sorted(bucket_of)
    disc_norm = sum((norms[k - 1] for k in discarded), ZERO)
    mapped = m.mapped(T)
    disc_sum = _sum_norm_sq([mapped.differences[k - 1] for k in discarded], T.target)
    if not kept:
        raise MartingaleError("no difference falls into a bucket")
    kept_sum = _sum_norm_sq([mapped.differences[k - 1] for k in kept], T.target)

    sub = subsequence(m, kept)
    g = _Glued(sub, mod)
    diffs, parts, origin = [], [g.initial()], []
    for pos, k in enumerate(kept, start=1):
        size = 4 ** bucket_of[k]
        for grp in range(1, mod // size + 1):
            js = range(size * (grp - 1) + 1, size * grp + 1)
            diffs.append(transport_many(sub.differences[pos - 1], js, mod))
            parts.append(g.partition(pos, size * grp))
            origin.append((k, grp))
    result = MDS(tuple(diffs), Filtration(tuple(parts)))
    return NormalizationResult(result, mod, levels, buckets, discarded, disc_norm, origin,
                               kept_sum, disc_sum)


def _sum_norm_sq(fs: Sequence[StepFunction], norm: NormKind) -> QuadRational:
    if not fs:
        return ZERO
    s = fs[0]
    for f in fs[1:]:
        s = s + f
    return l2_norm_sq(s, norm)


# ---------------------------------------------------------------------------
# martingale -> Haar cotype instance


@dataclass
class CotypeInstance:
    """Haar coefficients over D_0^n with values in [L2, X].

    Each coefficient is a function of ``t`` sampled on ``partition``; the
    vector stores the cell values back to back and is normed by the weighted
    l2-sum with the cell lengths as weights.
    """

    coeffs: HaarCoefficients
    partition: IntervalPartition
    inner_dimension: int
    function: StepFunction

    @property
    def weights(self) -> list:
        return self.partition.lengths()

    def norm(self, inner: NormKind) -> NormKind:
        return weighted_l2_sum(self.weights, inner)

    def coefficient_function(self, key) -> StepFunction:
        d = self.inner_dimension
        x = self.coeffs[key]
        vals = [x[i * d:(i + 1) * d] for i in range(self.partition.cell_count)]
        return StepFunction._raw(self.partition, tuple(vals), d)


def mds_to_cotype_instance(m: MDS) -> CotypeInstance:
    """View ``F(s, t) = d_i(t)`` for ``s`` in the i-th level-n dyadic cell as a Haar polynomial in ``s``."""
    N = len(m)
    n = N.bit_length() - 1
    if N != 1 << n:
        raise MartingaleError(f"length {N} is not a power of two")
    P = m.differences[0].partition
    for d in m.differences[1:]:
        P = P.union(d.partition)
    flat = []
    for d in m.differences:
        r = d.refine(P)
        flat.append(tuple(x for v in r.values for x in v))
    F = StepFunction._raw(dyadic_partition(n), tuple(flat), len(flat[0]))
    coeffs = analyze(F, 0, n, cap=max(n, 12))
    return CotypeInstance(coeffs, P, m.dimension, F)


def _block_of(inst: CotypeInstance, T: OperatorSpec, key) -> StepFunction:
    return apply_l2(T, inst.coefficient_function(key))


def cotype_instance_identities(m: MDS, T: OperatorSpec) -> dict:
    """Exact checks of the identities behind the martingale/Haar cotype comparison.

    Returns booleans for: ``||F||^2 = 2**-n sum ||d_i||^2``; the coefficient
    identity ``||[L2,T] x_k^(j)||^2 = 2**(k-1-2n) ||S_left - S_right||^2`` for
    every ``(k, j)`` (and ``2**-2n ||sum [L2,T] d_i||^2`` at ``(0, 0)``); the
    contraction ``||S_left|| <= ||S_left - S_right||``; and
    ``||S_left + S_right||^2 <= 9 ||S_left - S_right||^2``.
    """
    inst = mds_to_cotype_instance(m)
    N = len(m)
    n = N.bit_length() - 1
    src, tgt = T.source, T.target
    norms = m.norms_sq(src)
    F_norm = l2_norm_sq(inst.function, inst.norm(src))
    report = {"F_norm": F_norm == Fraction(1, N) * sum(norms, ZERO)}

    Td = [apply_l2(T, d) for d in m.differences]

    def group_sum(lo: int, hi: int) -> StepFunction:
        s = Td[lo]
        for f in Td[lo + 1:hi]:
            s = s + f
        return s

    coeff_ok, contraction_ok, triangle_ok = True, True, True
    failures = []
    for k, j in tree(0, n, cap=max(n, 12)):
        lhs = l2_norm_sq(_block_of(inst, T, (k, j)), tgt)
        if k == 0:
            rhs = Fraction(1, N * N) * l2_norm_sq(group_sum(0, N), tgt)
            if lhs != rhs:
                coeff_ok = False
                failures.append((k, j))
            continue
        width = N >> k  # |N_k^(i)|
        left = group_sum((2 * j - 2) * width, (2 * j - 1) * width)
        right = group_sum((2 * j - 1) * width, 2 * j * width)
        diff_sq = l2_norm_sq(left - right, tgt)
        scale = QuadRational(Fraction(2) ** (k - 1 - 2 * n), 0)
        if lhs != scale * diff_sq:
            coeff_ok = False
            failures.append((k, j))
        if not l2_norm_sq(left, tgt) <= diff_sq:
            contraction_ok = False
        if not l2_norm_sq(left + right, tgt) <= 9 * diff_sq:
            triangle_ok = False
    report.update(coefficients=coeff_ok, contraction=contraction_ok, triangle=triangle_ok,
                  failures=failures)
    return report
