"""Vector-valued step functions on [0, 1) with exact values.

A :class:`StepFunction` is constant on the half-open cells of an
:class:`IntervalPartition` with rational breakpoints.  Values are tuples of
:class:`~mtype_lab.scalars.QuadRational`; the value space carries one of the
norms described by :class:`NormKind`.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .errors import DimensionError, PartitionError
from .scalars import ONE, ZERO, QuadRational, as_quad, format_rational, parse_rational

__all__ = [
    "NormKind",
    "L1",
    "L2",
    "LINF",
    "weighted_l2_sum",
    "IntervalPartition",
    "StepFunction",
    "common_refinement",
    "l2_norm_sq",
    "pairing",
    "conditional_expectation",
    "transport",
    "dyadic_partition",
    "vec_add",
    "vec_sub",
    "vec_scale",
    "dot",
]

Vector = tuple


# ---------------------------------------------------------------------------
# vectors


def vec_add(u: Vector, v: Vector) -> Vector:
    return tuple(x + y for x, y in zip(u, v))


def vec_sub(u: Vector, v: Vector) -> Vector:
    return tuple(x - y for x, y in zip(u, v))


def vec_scale(s, v: Vector) -> Vector:
    return tuple(s * x for x in v)


def dot(u: Vector, v: Vector) -> QuadRational:
    total = ZERO
    for x, y in zip(u, v):
        if x and y:
            total = total + x * y
    return total


def _max(values: Iterable[QuadRational]) -> QuadRational:
    best = ZERO
    for x in values:
        if x > best:
            best = x
    return best


# ---------------------------------------------------------------------------
# norms


@dataclass(frozen=True)
class NormKind:
    """Norm on a coordinate space.

    ``tag`` is one of ``"l1"``, ``"l2"``, ``"linf"`` or ``"wl2"``.  The last is
    the weighted l2-sum ``(sum_i w_i ||block_i||_inner^2)^(1/2)`` of equal-size
    blocks; it represents an element of [L2, X] sampled on a partition whose
    cells have lengths ``w_i``.
    """

    tag: str
    weights: tuple = ()
    inner: Optional["NormKind"] = None

    def __post_init__(self):
        if self.tag not in ("l1", "l2", "linf", "wl2"):
            raise ValueError(f"unknown norm tag {self.tag!r}")
        if self.tag == "wl2":
            if not self.weights or self.inner is None:
                raise ValueError("weighted l2-sum needs weights and an inner norm")
            if any(Fraction(w) <= 0 for w in self.weights):
                raise ValueError("weights must be positive")

    def check_dimension(self, d: int) -> None:
        if self.tag == "wl2" and d % len(self.weights):
            raise DimensionError(f"dimension {d} is not a multiple of {len(self.weights)} blocks")

    def norm(self, v: Vector) -> QuadRational:
        """Exact norm; available for l1 and linf only."""
        if self.tag == "l1":
            total = ZERO
            for x in v:
                if x:
                    total = total + abs(x)
            return total
        if self.tag == "linf":
            return _max(abs(x) for x in v)
        raise ValueError(f"exact norm leaves the ring for {self.tag}; use norm_sq")

    def norm_sq(self, v: Vector) -> QuadRational:
        if self.tag == "l2":
            return dot(v, v)
        if self.tag == "wl2":
            self.check_dimension(len(v))
            size = len(v) // len(self.weights)
            total = ZERO
            for i, w in enumerate(self.weights):
                block = v[i * size:(i + 1) * size]
                total = total + Fraction(w) * self.inner.norm_sq(block)
            return total
        n = self.norm(v)
        return n * n

    def dual(self) -> "NormKind":
        if self.tag == "l1":
            return LINF
        if self.tag == "linf":
            return L1
        if self.tag == "l2":
            return L2
        raise ValueError("duals of weighted l2-sums are not supported")

    def l1_comparison_sq(self, d: int) -> Fraction:
        """Squared constant ``c`` with ``||x||_1 <= c ||x||`` in dimension ``d``."""
        if self.tag == "l1":
            return Fraction(1)
        if self.tag == "l2":
            return Fraction(d)
        if self.tag == "linf":
            return Fraction(d * d)
        size = d // len(self.weights)
        return self.inner.l1_comparison_sq(size) * sum(1 / Fraction(w) for w in self.weights)

    def to_json(self):
        if self.tag != "wl2":
            return self.tag
        return {"weighted_l2_sum": {"weights": [format_rational(w) for w in self.weights],
                                    "inner": self.inner.to_json()}}

    @classmethod
    def from_json(cls, obj) -> "NormKind":
        if isinstance(obj, str):
            key = obj.strip().lower().replace("_", "")
            aliases = {"l1": L1, "l2": L2, "l2sq": L2, "linf": LINF, "linfty": LINF}
            if key not in aliases:
                raise ValueError(f"unknown norm {obj!r}")
            return aliases[key]
        if isinstance(obj, dict) and "weighted_l2_sum" in obj:
            body = obj["weighted_l2_sum"]
            return weighted_l2_sum([parse_rational(w) for w in body["weights"]],
                                   cls.from_json(body["inner"]))
        raise ValueError(f"cannot parse norm {obj!r}")

    def __str__(self):
        if self.tag == "wl2":
            return f"wl2[{len(self.weights)}]({self.inner})"
        return self.tag


L1 = NormKind("l1")
L2 = NormKind("l2")
LINF = NormKind("linf")


def weighted_l2_sum(weights: Sequence, inner: NormKind) -> NormKind:
    return NormKind("wl2", tuple(Fraction(w) for w in weights), inner)


# ---------------------------------------------------------------------------
# partitions


class IntervalPartition:
    """Breakpoints ``0 = t_0 < t_1 < ... < t_r = 1`` with cells ``[t_i, t_{i+1})``."""

    __slots__ = ("breakpoints",)

    def __init__(self, breakpoints: Iterable):
        bps = tuple(b if type(b) is Fraction else parse_rational(b) for b in breakpoints)
        if len(bps) < 2:
            raise PartitionError("a partition needs at least the breakpoints 0 and 1")
        if bps[0] != 0 or bps[-1] != 1:
            raise PartitionError("breakpoints must start at 0 and end at 1")
        for lo, hi in zip(bps, bps[1:]):
            if not lo < hi:
                raise PartitionError("breakpoints must be strictly increasing")
        self.breakpoints = bps

    @classmethod
    def trivial(cls) -> "IntervalPartition":
        return cls((Fraction(0), Fraction(1)))

    @property
    def cell_count(self) -> int:
        return len(self.breakpoints) - 1

    def cells(self):
        return list(zip(self.breakpoints, self.breakpoints[1:]))

    def lengths(self) -> list:
        b = self.breakpoints
        return [b[i + 1] - b[i] for i in range(len(b) - 1)]

    def refines(self, other: "IntervalPartition") -> bool:
        """True if every breakpoint of ``other`` is one of ours."""
        return set(other.breakpoints) <= set(self.breakpoints)

    def union(self, other: "IntervalPartition") -> "IntervalPartition":
        if self.breakpoints == other.breakpoints:
            return self
        return IntervalPartition(sorted(set(self.breakpoints) | set(other.breakpoints)))

    def cell_of(self, t) -> int:
        t = Fraction(t)
        if not 0 <= t < 1:
            raise ValueError("t must lie in [0, 1)")
        return bisect.bisect_right(self.breakpoints, t) - 1

    def __eq__(self, other):
        return isinstance(other, IntervalPartition) and self.breakpoints == other.breakpoints

    def __hash__(self):
        return hash(self.breakpoints)

    def __repr__(self):
        return "IntervalPartition([" + ", ".join(map(str, self.breakpoints)) + "])"

    def to_json(self) -> list:
        return [format_rational(b) for b in self.breakpoints]

    @classmethod
    def from_json(cls, obj) -> "IntervalPartition":
        return cls(parse_rational(b) for b in obj)


def dyadic_partition(level: int) -> IntervalPartition:
    n = 1 << level
    return IntervalPartition(Fraction(i, n) for i in range(n + 1))


# ---------------------------------------------------------------------------
# step functions


class StepFunction:
    """Piecewise-constant map ``[0, 1) -> R^d``.

    Equality compares canonical forms, so two step functions are equal
    exactly when they agree pointwise.
    """

    __slots__ = ("partition", "values", "dimension")

    def __init__(self, partition, values: Sequence[Sequence], dimension: Optional[int] = None):
        if not isinstance(partition, IntervalPartition):
            partition = IntervalPartition(partition)
        vals = tuple(tuple(as_quad(x) for x in v) for v in values)
        if len(vals) != partition.cell_count:
            raise DimensionError(f"{len(vals)} values for {partition.cell_count} cells")
        if dimension is None:
            dimension = len(vals[0])
        if dimension < 1:
            raise DimensionError("the zero-dimensional space is not supported")
        if any(len(v) != dimension for v in vals):
            raise DimensionError(f"all values must have length {dimension}")
        self.partition = partition
        self.values = vals
        self.dimension = dimension

    @classmethod
    def _raw(cls, partition, values, dimension):
        obj = cls.__new__(cls)
        obj.partition = partition
        obj.values = values
        obj.dimension = dimension
        return obj

    @classmethod
    def constant(cls, value: Sequence) -> "StepFunction":
        return cls(IntervalPartition.trivial(), [value])

    @classmethod
    def zero(cls, dimension: int) -> "StepFunction":
        return cls(IntervalPartition.trivial(), [(ZERO,) * dimension], dimension)

    @classmethod
    def from_cells(cls, partition: IntervalPartition, values) -> "StepFunction":
        return cls(partition, values)

    @property
    def breakpoints(self):
        return self.partition.breakpoints

    def __call__(self, t):
        return self.values[self.partition.cell_of(t)]

    def refine(self, partition: IntervalPartition) -> "StepFunction":
        """Same function on a finer partition (which must contain our breakpoints)."""
        if partition is self.partition or partition == self.partition:
            return self
        own = self.breakpoints
        out = []
        i = 0
        for lo in partition.breakpoints[:-1]:
            while own[i + 1] <= lo:
                i += 1
            out.append(self.values[i])
        if not set(own) <= set(partition.breakpoints):
            raise PartitionError("target partition does not refine the function's partition")
        return StepFunction._raw(partition, tuple(out), self.dimension)

    def canonical(self) -> "StepFunction":
        bps = [self.breakpoints[0]]
        vals = []
        for i, v in enumerate(self.values):
            if vals and vals[-1] == v:
                continue
            if vals:
                bps.append(self.breakpoints[i])
            vals.append(v)
        bps.append(Fraction(1))
        return StepFunction._raw(IntervalPartition(bps), tuple(vals), self.dimension)

    def is_zero(self) -> bool:
        return not any(x for v in self.values for x in v)

    def map_values(self, fn, dimension: Optional[int] = None) -> "StepFunction":
        vals = tuple(tuple(fn(v)) for v in self.values)
        return StepFunction._raw(self.partition, vals, dimension or len(vals[0]))

    def scale(self, s) -> "StepFunction":
        s = as_quad(s)
        return self.map_values(lambda v: vec_scale(s, v), self.dimension)

    def _binary(self, other: "StepFunction", op) -> "StepFunction":
        if self.dimension != other.dimension:
            raise DimensionError(f"dimensions {self.dimension} and {other.dimension} differ")
        f, g = common_refinement(self, other)
        vals = tuple(op(u, v) for u, v in zip(f.values, g.values))
        return StepFunction._raw(f.partition, vals, self.dimension)

    def __add__(self, other):
        if not isinstance(other, StepFunction):
            return NotImplemented
        return self._binary(other, vec_add)

    def __sub__(self, other):
        if not isinstance(other, StepFunction):
            return NotImplemented
        return self._binary(other, vec_sub)

    def __neg__(self):
        return self.map_values(lambda v: tuple(-x for x in v), self.dimension)

    def __mul__(self, s):
        if isinstance(s, StepFunction):
            return NotImplemented
        return self.scale(s)

    __rmul__ = __mul__

    def integral(self) -> Vector:
        total = (ZERO,) * self.dimension
        for length, v in zip(self.partition.lengths(), self.values):
            total = vec_add(total, vec_scale(length, v))
        return total

    def restrict_coordinates(self, start: int, stop: int) -> "StepFunction":
        return self.map_values(lambda v: v[start:stop], stop - start)

    def __eq__(self, other):
        if not isinstance(other, StepFunction):
            return NotImplemented
        if self.dimension != other.dimension:
            return False
        a, b = self.canonical(), other.canonical()
        return a.partition == b.partition and a.values == b.values

    def __hash__(self):
        c = self.canonical()
        return hash((c.partition, c.values))

    def __repr__(self):
        return f"StepFunction(cells={self.partition.cell_count}, dimension={self.dimension})"

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension,
            "breakpoints": self.partition.to_json(),
            "values": [[x.to_json() for x in v] for v in self.values],
        }

    @classmethod
    def from_json(cls, obj) -> "StepFunction":
        try:
            dim = int(obj["dimension"])
            part = IntervalPartition.from_json(obj["breakpoints"])
            values = [[QuadRational.from_json(x) for x in v] for v in obj["values"]]
        except KeyError as exc:
            raise ValueError(f"step function is missing field {exc.args[0]!r}") from None
        return cls(part, values, dim)


# ---------------------------------------------------------------------------
# calculus


def common_refinement(f: StepFunction, g: StepFunction):
    """Return ``(f, g)`` re-expressed on the union of their breakpoints."""
    if f.partition == g.partition:
        return f, g
    p = f.partition.union(g.partition)
    return f.refine(p), g.refine(p)


def l2_norm_sq(f: StepFunction, norm: NormKind) -> QuadRational:
    """``int_0^1 ||f(t)||^2 dt`` exactly."""
    norm.check_dimension(f.dimension)
    total = ZERO
    for length, v in zip(f.partition.lengths(), f.values):
        n2 = norm.norm_sq(v)
        if n2:
            total = total + length * n2
    return total


def pairing(f: StepFunction, g: StepFunction) -> QuadRational:
    """``int_0^1 <f(t), g(t)> dt`` under the coordinate pairing."""
    if f.dimension != g.dimension:
        raise DimensionError(f"dimensions {f.dimension} and {g.dimension} differ")
    f, g = common_refinement(f, g)
    total = ZERO
    for length, u, v in zip(f.partition.lengths(), f.values, g.values):
        s = dot(u, v)
        if s:
            total = total + length * s
    return total


def conditional_expectation(f: StepFunction, coarser: IntervalPartition) -> StepFunction:
    """Average ``f`` over each cell of ``coarser``."""
    cb = coarser.breakpoints
    fb = f.breakpoints
    last = len(cb) - 1
    acc: list = [None] * last
    i = 0
    for c, v in enumerate(f.values):
        if not any(v):
            continue
        a, b = fb[c], fb[c + 1]
        while cb[i + 1] <= a:
            i += 1
        k = i
        while k < last and cb[k] < b:
            part = vec_scale(min(b, cb[k + 1]) - max(a, cb[k]), v)
            acc[k] = part if acc[k] is None else vec_add(acc[k], part)
            k += 1
    zero = (ZERO,) * f.dimension
    out = tuple(zero if x is None else vec_scale(1 / (cb[k + 1] - cb[k]), x) for k, x in enumerate(acc))
    return StepFunction._raw(coarser, out, f.dimension)


def transport(f: StepFunction, j: int, m: int) -> StepFunction:
    """Compress ``f`` into ``[(j-1)/m, j/m)`` via ``t -> m t - j + 1``; zero elsewhere."""
    if m < 1 or not 1 <= j <= m:
        raise ValueError(f"need 1 <= j <= m, got j={j}, m={m}")
    if m == 1:
        return f
    zero = (ZERO,) * f.dimension
    lo, hi = Fraction(j - 1, m), Fraction(j, m)
    bps = [Fraction(0)] if j > 1 else []
    vals = [zero] if j > 1 else []
    bps.extend(lo + s / m for s in f.breakpoints[:-1])
    vals.extend(f.values)
    if j < m:
        bps.append(hi)
        vals.append(zero)
    bps.append(Fraction(1))
    return StepFunction._raw(IntervalPartition(bps), tuple(vals), f.dimension)


def scalar_function(partition: IntervalPartition, values: Sequence) -> StepFunction:
    return StepFunction(partition, [(as_quad(v),) for v in values], 1)


def basis_vector(d: int, i: int, scale=ONE) -> Vector:
    v = [ZERO] * d
    v[i] = as_quad(scale)
    return tuple(v)
