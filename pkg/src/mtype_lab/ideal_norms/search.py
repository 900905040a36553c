"""Floating-point witness search.

The numerators of the type and cotype ratios are convex in the witness and
the denominators are l2-sums of norms, so the supremum is attained at
extreme points.  The search alternates linearization and exact linear
maximization over the constraint set (a conditional-gradient / power
iteration), which never decreases the numerator.  Everything here is float;
callers re-evaluate the best candidates exactly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, List, Optional

import numpy as np

from ..haar import synthesis_matrix, tree

__all__ = ["HaarProblem", "Candidate", "ascend", "random_restarts", "enumerate_equal_norm", "equal_norm_ascent"]

_EPS = 1e-15


def _norm(x: np.ndarray, tag: str) -> np.ndarray:
    """Row-wise norms over the last axis."""
    if tag == "l1":
        return np.abs(x).sum(axis=-1)
    if tag == "linf":
        return np.abs(x).max(axis=-1)
    return np.sqrt((x * x).sum(axis=-1))


def _grad_norm_sq(x: np.ndarray, tag: str) -> np.ndarray:
    """A subgradient of ``||x||^2`` row-wise."""
    if tag == "l2":
        return 2 * x
    if tag == "l1":
        return 2 * np.abs(x).sum(axis=-1, keepdims=True) * np.sign(x)
    idx = np.abs(x).argmax(axis=-1)
    g = np.zeros_like(x)
    rows = np.arange(x.shape[0])
    g[rows, idx] = 2 * np.abs(x[rows, idx]) * np.sign(x[rows, idx])
    return g


def _norming(g: np.ndarray, tag: str) -> np.ndarray:
    """Row-wise ``u`` with ``||u|| = 1`` maximizing ``<g, u>`` (value: the dual norm)."""
    if tag == "l2":
        n = np.sqrt((g * g).sum(axis=-1, keepdims=True))
        return np.where(n > _EPS, g / np.maximum(n, _EPS), 0.0)
    if tag == "linf":
        return np.where(np.abs(g) > _EPS, np.sign(g), 0.0)
    idx = np.abs(g).argmax(axis=-1)
    u = np.zeros_like(g)
    rows = np.arange(g.shape[0])
    u[rows, idx] = np.sign(g[rows, idx])
    return u


def _dual_tag(tag: str) -> str:
    return {"l1": "linf", "linf": "l1", "l2": "l2"}[tag]


@dataclass
class Candidate:
    ratio_sq: float
    X: np.ndarray      # coefficients, |tree| x d
    label: str


class HaarProblem:
    """Float model of the Haar type or cotype ratio for ``A`` on D_m^n."""

    def __init__(self, A: np.ndarray, src: str, tgt: str, m: int, n: int, direction: str):
        self.A = np.asarray(A, dtype=float)
        self.src, self.tgt = src, tgt
        self.m, self.n = m, n
        self.direction = direction
        self.idx = tree(m, n, cap=max(n, 12))
        self.H = synthesis_matrix(m, n)
        self.N = 1 << n
        self.d = self.A.shape[1]
        self.levels = np.array([k for k, _ in self.idx])

    # -- ratio -------------------------------------------------------------

    def ratio_sq(self, X: np.ndarray) -> float:
        if self.direction == "type":
            W = (self.H @ X) @ self.A.T
            num = (_norm(W, self.tgt) ** 2).sum() / self.N
            den = (_norm(X, self.src) ** 2).sum()
        else:
            num = (_norm(X @ self.A.T, self.tgt) ** 2).sum()
            den = (_norm(self.H @ X, self.src) ** 2).sum() / self.N
        return float(num / den) if den > _EPS else 0.0

    def batch_type_ratio_sq(self, Xb: np.ndarray) -> np.ndarray:
        """Type ratios for a batch ``(B, |tree|, d)``."""
        W = np.einsum("ct,btd,rd->bcr", self.H, Xb, self.A)
        num = (_norm(W, self.tgt) ** 2).sum(axis=1) / self.N
        den = (_norm(Xb, self.src) ** 2).sum(axis=1)
        return np.where(den > _EPS, num / np.maximum(den, _EPS), 0.0)

    # -- one ascent step ---------------------------------------------------

    def step(self, X: np.ndarray) -> np.ndarray:
        if self.direction == "type":
            W = (self.H @ X) @ self.A.T
            GW = _grad_norm_sq(W, self.tgt) / self.N
            G = self.H.T @ (GW @ self.A)
            dual = _norm(G, _dual_tag(self.src))
            Xn = dual[:, None] * _norming(G, self.src)
        else:
            # variable: the function values V on level-n cells; X = H^T V / N
            V = self.H @ X
            GX = _grad_norm_sq(X @ self.A.T, self.tgt) @ self.A
            GV = (self.H @ GX) / self.N
            dual = _norm(GV, _dual_tag(self.src))
            Vn = dual[:, None] * _norming(GV, self.src)
            Xn = self.H.T @ Vn / self.N
        s = np.sqrt((Xn * Xn).sum())
        return Xn / s if s > _EPS else X


def ascend(problem: HaarProblem, X: np.ndarray, iterations: int = 60) -> Candidate:
    best = problem.ratio_sq(X)
    for _ in range(iterations):
        Xn = problem.step(X)
        r = problem.ratio_sq(Xn)
        if r <= best * (1 + 1e-13):
            if r > best:
                X, best = Xn, r
            break
        X, best = Xn, r
    return Candidate(best, X, "ascent")


def random_restarts(problem: HaarProblem, seed: int, restarts: int, iterations: int) -> List[Candidate]:
    out = []
    for r in range(restarts):
        rng = np.random.default_rng([seed, r])
        X0 = rng.standard_normal((len(problem.idx), problem.d))
        c = ascend(problem, X0, iterations)
        c.label = f"restart[{r}]"
        out.append(c)
    return out


# ---------------------------------------------------------------------------
# equal-norm family: x_k^(j) = 2^(-(k-1)/2) * (signed basis vector)


def _level_scale(levels: np.ndarray) -> np.ndarray:
    return np.where(levels >= 1, 2.0 ** (-(np.maximum(levels, 1) - 1) / 2), 1.0)


def equal_norm_coefficients(choice: np.ndarray, signs: np.ndarray, levels: np.ndarray, d: int) -> np.ndarray:
    X = np.zeros((len(levels), d))
    X[np.arange(len(levels)), choice] = signs * _level_scale(levels)
    return X


def enumerate_equal_norm(problem: HaarProblem, budget: int, keep: int = 4,
                         batch: int = 4096) -> Optional[List[Candidate]]:
    """Exhaustive search over signed-basis choices per index (type direction, tree D_1^n).

    Returns ``None`` when ``(2 d)**|tree|`` exceeds the budget.
    """
    T = len(problem.idx)
    d = problem.d
    total = (2 * d) ** T
    if total > budget:
        return None
    scale = _level_scale(problem.levels)
    best: List[Candidate] = []
    it = itertools.product(range(2 * d), repeat=T)
    while True:
        chunk = list(itertools.islice(it, batch))
        if not chunk:
            break
        codes = np.array(chunk)
        Xb = np.zeros((len(chunk), T, d))
        coord, sign = codes // 2, 1.0 - 2.0 * (codes % 2)
        b_idx = np.repeat(np.arange(len(chunk)), T)
        t_idx = np.tile(np.arange(T), len(chunk))
        Xb[b_idx, t_idx, coord.ravel()] = (sign * scale).ravel()
        r = problem.batch_type_ratio_sq(Xb)
        top = np.argsort(-r, kind="stable")[:keep]
        best.extend(Candidate(float(r[i]), Xb[i], "enumeration") for i in top)
        best.sort(key=lambda c: -c.ratio_sq)
        best = best[:keep]
    return best


def equal_norm_ascent(problem: HaarProblem, seed: int, restarts: int, iterations: int) -> List[Candidate]:
    """Discrete ascent in the equal-norm family: re-choose each signed basis vector by the gradient."""
    out = []
    scale = _level_scale(problem.levels)
    rows = np.arange(len(problem.idx))
    for r in range(restarts):
        rng = np.random.default_rng([seed, 1000 + r])
        choice = rng.integers(0, problem.d, len(problem.idx))
        signs = rng.choice([-1.0, 1.0], len(problem.idx))
        X = equal_norm_coefficients(choice, signs, problem.levels, problem.d)
        best = problem.ratio_sq(X)
        for _ in range(iterations):
            W = (problem.H @ X) @ problem.A.T
            G = problem.H.T @ ((_grad_norm_sq(W, problem.tgt) / problem.N) @ problem.A)
            idx = np.abs(G).argmax(axis=1)
            Xn = np.zeros_like(X)
            sg = np.sign(G[rows, idx])
            sg[sg == 0] = 1.0
            Xn[rows, idx] = sg * scale
            rn = problem.ratio_sq(Xn)
            if rn <= best * (1 + 1e-13):
                break
            X, best = Xn, rn
        out.append(Candidate(best, X, f"equal-norm-restart[{r}]"))
    return out
