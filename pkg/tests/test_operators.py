import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given

from mtype_lab.errors import DimensionError
from mtype_lab.haar import synthesize
from mtype_lab.ideal_norms import summation_cotype_witness
from mtype_lab.operators import (
    OperatorSpec,
    adjoint,
    apply,
    apply_l2,
    diagonal_operator,
    identity_operator,
    lift_operator,
    log_weights,
    operator_norm,
    summation_operator,
)
from mtype_lab.samples import random_operator, random_vector
from mtype_lab.scalars import ONE, ZERO, QuadRational
from mtype_lab.stepfn import L1, L2, LINF, StepFunction, conditional_expectation, dot

from conftest import partitions, step_functions

F = Fraction
Q = QuadRational
SPACES = [L1, L2, LINF]


def vec(*xs):
    return tuple(Q(x) for x in xs)


def test_apply_examples():
    assert apply(identity_operator(3), vec(1, 2, 3)) == vec(1, 2, 3)
    assert apply(summation_operator(3), vec(1, 1, 1)) == vec(1, 2, 3)
    assert apply(diagonal_operator([1, F(1, 2)], 2), vec(2, 2)) == vec(2, 1)
    with pytest.raises(DimensionError):
        apply(identity_operator(2), vec(1, 2, 3))


def test_apply_l2_on_summation_witness():
    f = synthesize(summation_cotype_witness(1))
    g = apply_l2(summation_operator(2), f)
    assert g(F(1, 4)) == vec(1, 1) and g(F(3, 4)) == vec(0, 1)
    c = StepFunction.constant(vec(1, 2))
    assert apply_l2(identity_operator(2), c) == c


def test_summation_operator_shape_and_norm():
    assert summation_operator(1).matrix == ((ONE,),)
    rows = summation_operator(3).matrix
    assert rows == (vec(1, 0, 0), vec(1, 1, 0), vec(1, 1, 1))
    for n in range(1, 7):
        nrm = operator_norm(summation_operator(n))
        assert nrm.exact and nrm.upper_sq == 1


def test_named_operator_norms():
    assert operator_norm(identity_operator(2, L1)).upper_sq == 1
    D = diagonal_operator([1, F(1, 2), F(1, 4)], 3)
    nrm = operator_norm(D)
    assert nrm.exact and nrm.upper_sq == 1
    assert operator_norm(diagonal_operator([F(3, 4), F(1, 2)], 2)).upper_sq == F(9, 16)
    with pytest.raises(ValueError):
        diagonal_operator([F(1, 2), 1], 2)
    with pytest.raises(ValueError):
        diagonal_operator([1, 0], 2)


def _brute_norm(A, src, tgt):
    """Oracle: extreme points of the source ball, SVD, or the dual closed forms."""
    p = {"l1": 1, "l2": 2, "linf": np.inf}
    d = A.shape[1]
    if src.tag == "l1":
        cands = [np.eye(d)[i] for i in range(d)]
    elif src.tag == "linf":
        cands = [np.array(s) for s in itertools.product([-1.0, 1.0], repeat=d)]
    elif tgt.tag == "l2":
        return np.linalg.svd(A, compute_uv=False)[0]
    elif tgt.tag == "linf":
        return max(np.linalg.norm(row) for row in A)
    else:
        return max(np.linalg.norm(A.T @ np.array(s)) for s in itertools.product([-1.0, 1.0], repeat=A.shape[0]))
    return max(np.linalg.norm(A @ x, p[tgt.tag]) / np.linalg.norm(x, p[src.tag]) for x in cands)


@pytest.mark.parametrize("src,tgt", list(itertools.product(SPACES, SPACES)))
def test_operator_norm_bracket_contains_oracle(src, tgt):
    rng = np.random.default_rng(hash((src.tag, tgt.tag)) % 2 ** 32)
    for _ in range(5):
        T = random_operator(rng, int(rng.integers(1, 4)), int(rng.integers(1, 4)), src, tgt)
        nrm = operator_norm(T)
        assert nrm.lower_sq <= nrm.upper_sq
        if nrm.exact:
            assert nrm.lower_sq == nrm.upper_sq
        oracle = _brute_norm(T.to_float(), src, tgt)
        assert nrm.lower <= oracle * (1 + 1e-9) + 1e-12
        assert oracle <= nrm.upper * (1 + 1e-9) + 1e-12


@pytest.mark.parametrize("src,tgt", [(L1, L1), (L1, LINF), (LINF, L1), (L2, L2), (L2, L1), (LINF, L2)])
def test_norm_inequality_on_random_vectors(src, tgt):
    rng = np.random.default_rng(11)
    T = random_operator(rng, 3, 3, src, tgt)
    U = operator_norm(T).upper_sq
    for _ in range(1000):
        v = random_vector(rng, 3)
        assert tgt.norm_sq(apply(T, v)) <= U * src.norm_sq(v)


@pytest.mark.parametrize("src,tgt", list(itertools.product(SPACES, SPACES)))
def test_adjoint_pairing_identity(src, tgt):
    rng = np.random.default_rng(3)
    T = random_operator(rng, 3, 2, src, tgt, quad=True)
    Ta = adjoint(T)
    assert Ta.source == tgt.dual() and Ta.target == src.dual()
    for i, j in itertools.product(range(2), range(3)):
        x = tuple(ONE if k == i else ZERO for k in range(2))
        y = tuple(ONE if k == j else ZERO for k in range(3))
        assert dot(apply(T, x), y) == dot(x, apply(Ta, y))
    assert adjoint(Ta) == T


def test_adjoint_examples():
    I = identity_operator(3, L2)
    assert adjoint(I) == I
    S = adjoint(summation_operator(3))
    assert S.source == L1 and S.target == LINF
    assert S.matrix == (vec(1, 1, 1), vec(0, 1, 1), vec(0, 0, 1))


@given(step_functions(dim=2), partitions())
def test_apply_l2_commutes_with_conditional_expectation(f, P):
    T = OperatorSpec([[1, 2], [Q(0, 1), -1], [F(1, 3), 0]], L1, L2)
    assert conditional_expectation(apply_l2(T, f), P) == apply_l2(T, conditional_expectation(f, P))


def test_log_weights_monotone_and_lift():
    w = log_weights(6)
    assert w[0] == 1 and all(a >= b > 0 for a, b in zip(w, w[1:]))
    assert abs(float(w[2]) - 1 / (1 + np.log(3))) < 1e-14
    D = diagonal_operator(w, 6)
    assert operator_norm(D).upper_sq == 1
    L = lift_operator(identity_operator(2), [F(1, 2), F(1, 2)])
    assert L.rows == L.cols == 4


def test_json_round_trip():
    T = OperatorSpec([[Q(1, 1), 0], [F(1, 3), -2]], L1, LINF)
    assert OperatorSpec.from_json(T.to_json()) == T
