"""Cross-checks between ideal norms that hold by theorem.

A relation ``left <= c * right`` is checked in its only soundly checkable
form: certified lower bound of the left side against ``c`` times the
rigorous upper bound of the right side, squared and in exact arithmetic.
A failure is a bug, never a numerical accident.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from ..operators import OperatorSpec, adjoint
from ..scalars import QuadRational
from .estimate import IdealNormEstimate, SearchConfig, estimate

__all__ = ["RelationCheck", "RelationReport", "verify_relations", "EstimateCache"]

_LP = ("l1", "l2", "linf")


@dataclass(frozen=True)
class RelationCheck:
    name: str
    n: int
    left: str
    right: str
    constant_sq: Fraction
    lower_left_sq: QuadRational
    upper_right_sq: QuadRational

    @property
    def passed(self) -> bool:
        return self.lower_left_sq <= self.constant_sq * self.upper_right_sq

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "n": self.n,
            "left": self.left,
            "right": self.right,
            "constant_sq": str(self.constant_sq),
            "lower_left": self.lower_left_sq.sqrt_float(),
            "upper_right": self.upper_right_sq.sqrt_float(),
            "lower_left_sq": self.lower_left_sq.to_json(),
            "upper_right_sq": self.upper_right_sq.to_json(),
            "passed": self.passed,
        }


@dataclass
class RelationReport:
    checks: List[RelationCheck] = field(default_factory=list)
    skipped: List[str] = field(default_factory=list)

    @property
    def violations(self) -> List[RelationCheck]:
        return [c for c in self.checks if not c.passed]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "checks": [c.to_json() for c in self.checks],
            "violations": [c.name for c in self.violations],
            "skipped": list(self.skipped),
        }


class EstimateCache:
    """Memoizes estimates per (operator label, kind, index)."""

    def __init__(self, config: SearchConfig):
        self.config = config
        self._store: Dict[Tuple[str, str, object], IdealNormEstimate] = {}

    def get(self, label: str, T: OperatorSpec, kind: str, index) -> IdealNormEstimate:
        key = (label, kind, index)
        if key not in self._store:
            self._store[key] = estimate(T, kind, index, self.config)
        return self._store[key]


def _describe(op: str, kind: str, index) -> str:
    sym = {"haar_type": "tau", "haar_cotype": "gamma", "mtype": "tau", "mcotype": "gamma", "eq_mtype": "tau_eq"}[kind]
    where = f"H(D_{index[0]}^{index[1]})" if isinstance(index, tuple) else f"M_{index}"
    return f"{sym}({op}|{where})"


def verify_relations(T: OperatorSpec, n: int, config: Optional[SearchConfig] = None,
                     cache: Optional[EstimateCache] = None) -> RelationReport:
    """Run every relation at index ``n``."""
    if n < 1:
        raise ValueError("n must be positive")
    cfg = config or SearchConfig()
    cache = cache or EstimateCache(cfg)
    ops = {"T": T}
    report = RelationReport()
    if T.source.tag in _LP and T.target.tag in _LP:
        ops["T'"] = adjoint(T)

    def check(name, left, right, c_sq):
        (lop, lkind, lidx), (rop, rkind, ridx) = left, right
        lo = cache.get(lop, ops[lop], lkind, lidx).lower_sq
        up = cache.get(rop, ops[rop], rkind, ridx).upper_sq
        report.checks.append(RelationCheck(
            name, n, _describe(lop, lkind, lidx), _describe(rop, rkind, ridx), Fraction(c_sq), lo, up))

    D0, D1 = (0, n), (1, n)
    # martingales dominate the Haar subsystem
    check("haar-type-below-martingale-type", ("T", "haar_type", D1), ("T", "mtype", n), 1)
    check("haar-cotype-below-martingale-cotype", ("T", "haar_cotype", D1), ("T", "mcotype", n), 1)
    # dropping or adding the constant function
    check("type-subtree-lower", ("T", "haar_type", D1), ("T", "haar_type", D0), 1)
    check("type-subtree-upper", ("T", "haar_type", D0), ("T", "haar_type", D1), 4)
    check("cotype-subtree-lower", ("T", "haar_cotype", D1), ("T", "haar_cotype", D0), 1)
    check("cotype-subtree-upper", ("T", "haar_cotype", D0), ("T", "haar_cotype", D1), 9)
    # long martingales against the full Haar cotype norm
    if n <= cfg.level_cap:
        check("martingale-type-vs-haar-cotype", ("T", "mtype", 1 << n), ("T", "haar_cotype", D0),
              Fraction(9 * (1 << n), n))
    # equal-norm martingale type
    check("equal-norm-below-type", ("T", "eq_mtype", n), ("T", "mtype", n), 1)
    check("type-below-16-equal-norm", ("T", "mtype", n), ("T", "eq_mtype", n), 256)
    check("equal-norm-monotone", ("T", "eq_mtype", n), ("T", "eq_mtype", n + 1), 1)

    if "T'" not in ops:
        report.skipped.append("duality relations: adjoint needs l_p source and target")
        return report
    for a, b in (("T", "T'"), ("T'", "T")):
        check(f"haar-duality-m0 gamma({a}) <= tau({b})", (a, "haar_cotype", D0), (b, "haar_type", D0), 1)
        check(f"haar-duality-m0 tau({b}) <= gamma({a})", (b, "haar_type", D0), (a, "haar_cotype", D0), 1)
        if n >= 2:
            check(f"haar-duality-m1 gamma({a}) <= tau({b})", (a, "haar_cotype", D1), (b, "haar_type", D1), 1)
            check(f"haar-duality-m1 tau({b}) <= 2 gamma({a})", (b, "haar_type", D1), (a, "haar_cotype", D1), 4)
        check(f"martingale-duality gamma({a}) <= 2 tau({b})", (a, "mcotype", n), (b, "mtype", n), 4)
        check(f"martingale-duality tau({b}) <= 2 gamma({a})", (b, "mtype", n), (a, "mcotype", n), 4)
    return report
