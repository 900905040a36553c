"""Certified lower / rigorous upper bounds for one ideal norm at one index.

Lower bounds always come from an explicit witness whose ratio is
re-evaluated exactly; upper bounds come from closed-form caps in terms of
a rigorous operator-norm bound.  Neither side is a point estimate.

The martingale kinds search over Haar martingales and over glued or
blocked versions of them; the defining suprema range over all filtrations,
so these lower bounds are honest but not necessarily tight.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from ..haar import DEFAULT_LEVEL_CAP, HaarCoefficients, check_level, haar_scale, tree
from ..martingales import MDS, equalize, from_haar_coeffs, glue, pad
from ..operators import OperatorNorm, OperatorSpec, adjoint, operator_norm
from ..scalars import ZERO, QuadRational
from ..stepfn import NormKind
from .ratios import Ratio, haar_ratio, martingale_ratio, type_p_ratio
from .search import (
    Candidate,
    HaarProblem,
    enumerate_equal_norm,
    equal_norm_ascent,
    random_restarts,
)
from .witnesses import conjugate_exponent, diagonal_type_witness, summation_cotype_witness

__all__ = ["KINDS", "SearchConfig", "IdealNormEstimate", "estimate", "upper_bounds", "normalize_index"]

KINDS = ("haar_type", "haar_cotype", "mtype", "mcotype", "eq_mtype", "type_p")
_LP = ("l1", "l2", "linf")


@dataclass(frozen=True)
class SearchConfig:
    seed: int = 0
    restarts: int = 8
    iterations: int = 60
    enum_budget: int = 10 ** 6
    level_cap: int = DEFAULT_LEVEL_CAP
    search_levels: int = 6
    certify_top: int = 3
    workers: int = 1

    def __post_init__(self):
        if self.level_cap < 1 or self.enum_budget < 1 or self.search_levels < 1:
            raise ValueError("caps and budgets must be positive")


@dataclass
class IdealNormEstimate:
    kind: str
    index: Union[int, Tuple[int, int]]
    lower_sq: Optional[QuadRational]
    upper_sq: Optional[QuadRational]
    lower: float
    upper: float
    lower_source: str
    upper_source: str
    witness: Optional[Union[HaarCoefficients, MDS]]
    witness_variant: Optional[str]
    seed: int
    budget: int
    p: Optional[Fraction] = None
    notes: List[str] = field(default_factory=list)

    @property
    def exact(self) -> bool:
        return self.lower_sq is not None and self.lower_sq == self.upper_sq

    @property
    def n(self) -> int:
        return self.index[1] if isinstance(self.index, tuple) else self.index

    def to_json(self, include_witness: bool = True) -> dict:
        out = {
            "kind": self.kind,
            "index": list(self.index) if isinstance(self.index, tuple) else self.index,
            "lower": self.lower,
            "upper": self.upper,
            "lower_sq": self.lower_sq.to_json() if self.lower_sq is not None else None,
            "upper_sq": self.upper_sq.to_json() if self.upper_sq is not None else None,
            "exact": self.exact,
            "lower_source": self.lower_source,
            "upper_source": self.upper_source,
            "witness_variant": self.witness_variant,
            "seed": self.seed,
            "budget": self.budget,
            "p": str(self.p) if self.p is not None else None,
            "notes": list(self.notes),
        }
        if include_witness:
            out["witness"] = self.witness.to_json() if self.witness is not None else None
        return out


def normalize_index(kind: str, index) -> Union[int, Tuple[int, int]]:
    if kind in ("haar_type", "haar_cotype"):
        if isinstance(index, int):
            index = (0, index)
        m, n = (int(x) for x in index)
        if not 0 <= m <= n or n < 1:
            raise ValueError(f"invalid tree index D_{m}^{n}")
        return (m, n)
    if isinstance(index, (tuple, list)):
        index = index[-1]
    n = int(index)
    if n < 1:
        raise ValueError("n must be positive")
    return n


# ---------------------------------------------------------------------------
# upper bounds


def _levels(m: int, n: int) -> int:
    return n + 1 if m == 0 else n - m + 1


def _hilbert(T: OperatorSpec) -> bool:
    return T.source.tag == "l2" and T.target.tag == "l2"


def upper_bounds(T: OperatorSpec, kind: str, index, norm: Optional[OperatorNorm] = None,
                 adj_norm: Optional[OperatorNorm] = None) -> List[Tuple[QuadRational, str]]:
    """All rigorous squared upper bounds available for one kind, with provenance tags."""
    norm = norm or operator_norm(T)
    U = norm.upper_sq
    if adj_norm is None and T.source.tag in _LP and T.target.tag in _LP:
        adj_norm = operator_norm(adjoint(T))
    Ua = adj_norm.upper_sq if adj_norm is not None else None
    out: List[Tuple[QuadRational, str]] = []
    if kind in ("haar_type", "haar_cotype"):
        m, n = index
        L = _levels(m, n)
        out.append((L * U, "level-count cap sqrt(levels)*||T||"))
        if m == 0:
            out.append(((n + 1) * U, "cap (n+1)^(1/2)*||T|| on D_0^n"))
        if _hilbert(T):
            out.append((U, "orthogonality in Hilbert space"))
        if Ua is not None:
            factor = 1 if m == 0 else 4
            tag = "duality at m=0 (factor 1)" if m == 0 else "duality (factor 2)"
            out.append((factor * L * Ua, tag))
    elif kind in ("mtype", "eq_mtype"):
        n = index
        out.append((n * U, "triangle inequality sqrt(n)*||T||"))
        out.append((4 * n * U, "cap 2 sqrt(n)*||T||"))
        if _hilbert(T):
            out.append((U, "orthogonality in Hilbert space"))
        if Ua is not None:
            out.append((4 * 4 * n * Ua, "duality: 2*gamma(T'|M_n)"))
        if kind == "eq_mtype":
            out.append((n * U, "equal-norm below martingale type"))
    elif kind == "mcotype":
        n = index
        out.append((4 * n * U, "cap 2 sqrt(n)*||T||"))
        if _hilbert(T):
            out.append((U, "orthogonality in Hilbert space"))
        if Ua is not None:
            out.append((4 * n * Ua, "duality: 2*tau(T'|M_n)"))
    else:
        raise ValueError(f"no exact upper bounds for kind {kind!r}")
    return out


def _best_upper(bounds):
    best = bounds[0]
    for b in bounds[1:]:
        if b[0] < best[0]:
            best = b
    return best


# ---------------------------------------------------------------------------
# exact witnesses from float candidates


def _rational(x: float) -> Fraction:
    return Fraction(x).limit_denominator(10 ** 4)


def _exact_from_float(X: np.ndarray, m: int, n: int, equal_norm: bool) -> HaarCoefficients:
    idx = tree(m, n, cap=max(n, DEFAULT_LEVEL_CAP))
    coeffs = {}
    for row, (k, j) in zip(X, idx):
        if equal_norm:
            v = [ZERO] * len(row)
            i = int(np.argmax(np.abs(row)))
            if row[i] != 0:
                v[i] = haar_scale(k).inverse() * (1 if row[i] > 0 else -1)
            coeffs[(k, j)] = tuple(v)
        else:
            coeffs[(k, j)] = tuple(QuadRational(_rational(float(x)), 0) for x in row)
    return HaarCoefficients(m, n, X.shape[1], coeffs)


def _basis_witnesses(T: OperatorSpec, m: int, n: int) -> List[HaarCoefficients]:
    """One coefficient ``e_c`` at the first tree index, for every column ``c``."""
    first = tree(m, n, cap=max(n, DEFAULT_LEVEL_CAP))[0]
    out = []
    for c in range(T.cols):
        v = [ZERO] * T.cols
        v[c] = QuadRational(1, 0)
        out.append(HaarCoefficients(m, n, T.cols, {first: tuple(v)}))
    return out


def _diagonal_profile(T: OperatorSpec, n: int) -> Optional[list]:
    """Column norms used as level weights for the diagonal-style witness."""
    if T.source.tag != "l1" or T.target.tag not in ("l1", "linf") or T.cols < n:
        return None
    return [T.target.norm(T.column(c)) for c in range(T.cols)]


def _diagonal_candidate(T: OperatorSpec, m: int, n: int, p=2) -> Optional[HaarCoefficients]:
    if m not in (0, 1):
        return None
    w = _diagonal_profile(T, n)
    if w is None or not any(w[:n]):
        return None
    # the witness needs positive weights; replace zero columns by 0 coefficients
    coeffs = diagonal_type_witness([x if x else QuadRational(1, 0) for x in w], n, p, m).coeffs
    for k in range(1, n + 1):
        if not w[k - 1]:
            for j in range(1, (1 << (k - 1)) + 1):
                coeffs[(k, j)] = (ZERO,) * T.cols
    return HaarCoefficients(m, n, T.cols, coeffs)


def _problem(T: OperatorSpec, m: int, n: int, direction: str) -> Optional[HaarProblem]:
    if T.source.tag not in _LP or T.target.tag not in _LP:
        return None
    return HaarProblem(T.to_float(), T.source.tag, T.target.tag, m, n, direction)


def _map(fn, items, workers: int):
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


def _certify(T: OperatorSpec, cands: Sequence[HaarCoefficients], direction: str, workers: int):
    """Exact ratios for every candidate; returns the best (first on ties)."""

    def evaluate(c):
        try:
            return haar_ratio(T, c, direction)
        except Exception:  # degenerate witnesses are simply skipped
            return None

    ratios = _map(evaluate, list(cands), workers)
    best, best_ratio = None, None
    for c, r in zip(cands, ratios):
        if r is None:
            continue
        if best_ratio is None or r.sq > best_ratio.sq:
            best, best_ratio = c, r
    return best, best_ratio


def _haar_search(T: OperatorSpec, m: int, n: int, direction: str, cfg: SearchConfig,
                 equal_norm_only: bool = False):
    """Best exact Haar witness on D_m^n.  Returns ``(coeffs, ratio, label)``."""
    exact_cands: List[Tuple[HaarCoefficients, str]] = []
    if not equal_norm_only:
        exact_cands += [(c, "basis witness") for c in _basis_witnesses(T, m, n)]
        if direction == "type":
            diag = _diagonal_candidate(T, m, n)
            if diag is not None:
                exact_cands.append((diag, "diagonal witness"))
        if direction == "cotype" and m == 0 and T.cols == 1 << n and T.source.tag == "l1":
            exact_cands.append((summation_cotype_witness(n, cap=max(n, cfg.level_cap)), "summation witness"))
    problem = _problem(T, m, n, direction)
    float_cands: List[Tuple[Candidate, bool]] = []
    if problem is not None and not T.is_zero():
        if direction == "type" and m >= 1:
            enum = enumerate_equal_norm(problem, cfg.enum_budget)
            if enum is not None:
                float_cands += [(c, True) for c in enum]
            else:
                float_cands += [(c, True) for c in equal_norm_ascent(problem, cfg.seed, cfg.restarts, cfg.iterations)]
        if not equal_norm_only:
            float_cands += [(c, False) for c in random_restarts(problem, cfg.seed, cfg.restarts, cfg.iterations)]
    float_cands.sort(key=lambda c: -c[0].ratio_sq)
    for cand, eq in float_cands[:cfg.certify_top]:
        exact_cands.append((_exact_from_float(cand.X, m, n, eq), cand.label))
    if equal_norm_only:
        # the equal-norm family again, exactly: scale 2^{-(k-1)/2} times a signed basis vector
        pass
    coeffs = [c for c, _ in exact_cands]
    best, ratio = _certify(T, coeffs, direction, cfg.workers)
    label = next((lab for c, lab in exact_cands if c is best), None)
    return best, ratio, label


# ---------------------------------------------------------------------------
# estimator


def _finish(kind, index, ratio: Optional[Ratio], witness, variant, lower_label, T, cfg, notes=None,
            norm=None) -> IdealNormEstimate:
    bounds = upper_bounds(T, kind, index, norm=norm)
    upper_sq, upper_tag = _best_upper(bounds)
    lower_sq = ratio.sq if ratio is not None else ZERO
    if lower_sq > upper_sq:
        raise AssertionError(f"certified lower bound exceeds rigorous upper bound for {kind} {index}")
    return IdealNormEstimate(
        kind=kind, index=index, lower_sq=lower_sq, upper_sq=upper_sq,
        lower=lower_sq.sqrt_float(), upper=upper_sq.sqrt_float(),
        lower_source=lower_label or "zero", upper_source=upper_tag,
        witness=witness, witness_variant=variant, seed=cfg.seed, budget=cfg.enum_budget,
        notes=list(notes or []))


_MARTINGALE_NOTE = ("martingale witnesses are searched among Haar martingales and their glued/blocked "
                    "versions; the supremum ranges over all filtrations, so the lower bound may not be tight")


def _eq_base(T, n, cfg):
    c, r, label = _haar_search(T, 1, n, "type", cfg, equal_norm_only=True)
    return c, r, label


def _estimate_eq_mtype(T: OperatorSpec, n: int, cfg: SearchConfig, norm) -> IdealNormEstimate:
    S = cfg.search_levels
    options = []
    if n <= S:
        options.append((n, "direct"))
    options += [(d, "glue") for d in range(1, min(n - 1, S) + 1) if n % d == 0]
    if 2 <= n and n - 1 <= S:
        options.append((n - 1, "equalize"))
    best = None
    for base_n, how in options:
        c, r, label = _eq_base(T, base_n, cfg)
        if c is None:
            continue
        if best is None or r.sq > best[1].sq:
            best = (c, r, label, base_n, how)
    candidates = []
    if best is not None:
        c, r, label, base_n, how = best
        mds = from_haar_coeffs(c)
        if how == "glue" and base_n < n:
            mds = glue(mds, n // base_n)
        elif how == "equalize":
            mds = equalize(mds, T.source)
        candidates.append((mds, "equal_norm", f"{label} ({how} from n={base_n})"))
    # any type witness gives an equal-norm lower bound through the sup-normalized ratio
    tc, tr, tlabel = _haar_search(T, 1, min(n, S), "type", cfg)
    if tc is not None:
        candidates.append((pad(from_haar_coeffs(tc), n), "equal_norm_sup", f"{tlabel} (sup-normalized)"))
    best_w = None
    for mds, variant, label in candidates:
        try:
            r = martingale_ratio(T, mds, variant, check=False)
        except Exception:
            continue
        if best_w is None or r.sq > best_w[1].sq:
            best_w = (mds, r, variant, label)
    if best_w is None:
        return _finish("eq_mtype", n, None, None, None, None, T, cfg, [_MARTINGALE_NOTE], norm)
    mds, r, variant, label = best_w
    return _finish("eq_mtype", n, r, mds, variant, label, T, cfg, [_MARTINGALE_NOTE], norm)


def _estimate_type_p(T: OperatorSpec, n: int, p: Fraction, cfg: SearchConfig, norm) -> IdealNormEstimate:
    q = conjugate_exponent(p)
    cands = []
    diag = _diagonal_candidate(T, 1, n, p)
    if diag is not None:
        cands.append((diag, "diagonal witness"))
    c2, _, label = _haar_search(T, 1, n, "type", cfg)
    if c2 is not None:
        cands.append((c2, f"{label} (p=2 optimum)"))
    best = (0.0, None, "zero")
    for c, lab in cands:
        try:
            v = type_p_ratio(T, c, p)
        except Exception:
            continue
        if v > best[0]:
            best = (v, c, lab)
    lower = best[0] * (1 - 1e-12)
    upper = float(n) ** (1.0 / float(q)) * norm.upper * (1 + 1e-12)
    return IdealNormEstimate(
        kind="type_p", index=n, lower_sq=None, upper_sq=None, lower=lower, upper=upper,
        lower_source=best[2], upper_source="Hoelder cap n^(1/p')*||T|| (outward rounded)",
        witness=best[1], witness_variant="type_p", seed=cfg.seed, budget=cfg.enum_budget, p=p,
        notes=["float ratios rounded outward by 1e-12"])


def estimate(T: OperatorSpec, kind: str, index, config: Optional[SearchConfig] = None,
             p=None) -> IdealNormEstimate:
    """Bracket one ideal norm of ``T``.

    ``kind`` is one of :data:`KINDS`.  Haar kinds take ``index=(m, n)`` (a bare
    ``n`` means D_0^n); the others take ``n``.  ``type_p`` needs ``p`` in (1, 2].
    """
    cfg = config or SearchConfig()
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    index = normalize_index(kind, index)
    n = index[1] if isinstance(index, tuple) else index
    if kind in ("haar_type", "haar_cotype", "type_p"):
        check_level(n, cfg.level_cap)
    norm = operator_norm(T)

    if kind in ("haar_type", "haar_cotype"):
        m, n = index
        direction = "type" if kind == "haar_type" else "cotype"
        c, r, label = _haar_search(T, m, n, direction, cfg)
        return _finish(kind, index, r, c, direction, label, T, cfg, norm=norm)
    if kind == "type_p":
        if p is None:
            raise ValueError("type_p needs p")
        return _estimate_type_p(T, n, Fraction(p), cfg, norm)
    if kind == "eq_mtype":
        return _estimate_eq_mtype(T, n, cfg, norm)
    direction = "type" if kind == "mtype" else "cotype"
    s = min(n, cfg.search_levels)
    c, r, label = _haar_search(T, 1, s, direction, cfg)
    if c is None:
        return _finish(kind, n, None, None, None, None, T, cfg, [_MARTINGALE_NOTE], norm)
    mds = pad(from_haar_coeffs(c), n)
    note = [_MARTINGALE_NOTE]
    if s < n:
        note.append(f"Haar witness of depth {s} padded with {n - s} zero differences")
    return _finish(kind, n, r, mds, direction, f"{label} (Haar martingale)", T, cfg, note, norm)
