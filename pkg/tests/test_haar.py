from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mtype_lab.errors import LevelCapError
from mtype_lab.haar import HaarCoefficients, analyze, haar_fn, synthesis_matrix, synthesize, tree
from mtype_lab.ideal_norms import summation_witness_function
from mtype_lab.samples import random_haar_coeffs
from mtype_lab.scalars import ONE, ZERO, QuadRational
from mtype_lab.stepfn import L2, StepFunction, conditional_expectation, dyadic_partition, l2_norm_sq, pairing

from conftest import step_functions

F = Fraction
Q = QuadRational


def all_indices(n):
    return tree(0, n)


def test_haar_fn_examples():
    assert haar_fn(0, 0) == StepFunction.constant((ONE,))
    h = haar_fn(1, 1)
    assert h(F(1, 4)) == (ONE,) and h(F(3, 4)) == (-ONE,)
    h = haar_fn(2, 1)
    assert h(F(1, 8)) == (Q(0, 1),) and h(F(3, 8)) == (Q(0, -1),) and h(F(3, 4)) == (ZERO,)
    with pytest.raises(ValueError):
        haar_fn(2, 3)


def test_haar_fn_against_formula():
    # oracle: +-2^{(k-1)/2} on the halves of the j-th dyadic interval of length 2^{-(k-1)}
    for k in range(1, 6):
        for j in range(1, 2 ** (k - 1) + 1):
            h = haar_fn(k, j)
            lo = F(j - 1, 2 ** (k - 1))
            w = F(1, 2 ** k)
            amp = 2 ** ((k - 1) / 2)
            for t, expect in ((lo + w / 2, amp), (lo + 3 * w / 2, -amp)):
                assert float(h(t)[0]) == pytest.approx(expect, rel=1e-15)
            if lo > 0:
                assert h(lo / 2) == (ZERO,)


def test_orthonormality_to_level_6():
    idx = all_indices(6)
    fns = {key: haar_fn(*key) for key in idx}
    for a in idx:
        for b in idx:
            assert pairing(fns[a], fns[b]) == (1 if a == b else 0)


def test_tree_examples():
    assert tree(1, 1) == [(1, 1)]
    assert tree(0, 2) == [(0, 0), (1, 1), (2, 1), (2, 2)]
    assert len(tree(2, 3)) == 6
    for n in range(1, 8):
        assert len(tree(1, n)) == 2 ** n - 1 and len(tree(0, n)) == 2 ** n
    with pytest.raises(ValueError):
        tree(3, 2)
    with pytest.raises(LevelCapError):
        tree(0, 13)


def test_analyze_examples():
    c = analyze(StepFunction.constant((Q(3), Q(0, 1))), 0, 3)
    assert c[(0, 0)] == (Q(3), Q(0, 1))
    assert all(not any(c[key]) for key in tree(1, 3))
    c = analyze(summation_witness_function(1), 0, 1)
    h = Q(F(1, 2))
    assert c[(0, 0)] == (h, h) and c[(1, 1)] == (h, -h)


@pytest.mark.parametrize("m,n", [(0, 1), (0, 4), (1, 3), (2, 5), (0, 6)])
def test_round_trips(m, n):
    rng = np.random.default_rng(100 * m + n)
    c = random_haar_coeffs(rng, m, n, 2, quad=True)
    assert analyze(synthesize(c), m, n) == c
    f = synthesize(c)
    assert synthesize(analyze(f, 0, n)) == conditional_expectation(f, dyadic_partition(n))


@given(step_functions(), st.integers(1, 5))
def test_synthesize_analyze_is_dyadic_projection(f, n):
    assert synthesize(analyze(f, 0, n)) == conditional_expectation(f, dyadic_partition(n))


@pytest.mark.parametrize("n", range(1, 7))
def test_parseval_euclidean(n):
    rng = np.random.default_rng(n)
    c = random_haar_coeffs(rng, 0, n, 3, quad=True)
    total = sum((L2.norm_sq(v) for v in c.coeffs.values()), ZERO)
    assert l2_norm_sq(synthesize(c), L2) == total


def test_synthesize_examples():
    assert synthesize(HaarCoefficients(0, 3, 2, {})).is_zero()
    x = (Q(2), Q(-1, 1))
    s = synthesize(HaarCoefficients(1, 1, 2, {(1, 1): x}))
    assert s == haar_fn(1, 1).map_values(lambda v: tuple(v[0] * y for y in x), 2)


def test_same_level_disjoint_supports():
    for k in range(1, 6):
        fns = [haar_fn(k, j) for j in range(1, 2 ** (k - 1) + 1)]
        P = dyadic_partition(k)
        for t in [(lo + hi) / 2 for lo, hi in P.cells()]:
            assert sum(1 for f in fns if f(t)[0]) == 1


def test_synthesis_matrix_matches_exact():
    H = synthesis_matrix(1, 4)
    for col, key in enumerate(tree(1, 4)):
        exact = haar_fn(*key).refine(dyadic_partition(4))
        assert np.allclose(H[:, col], [float(v[0]) for v in exact.values])


def test_json_round_trip():
    c = random_haar_coeffs(np.random.default_rng(5), 1, 3, 2, quad=True)
    assert HaarCoefficients.from_json(c.to_json()) == c
    assert list(c.to_json()["coeffs"]) == [f"{k},{j}" for k, j in tree(1, 3)]
