from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mtype_lab.errors import MartingaleError
from mtype_lab.haar import HaarCoefficients, haar_fn
from mtype_lab.ideal_norms import summation_cotype_witness
from mtype_lab.martingales import (
    MDS,
    Filtration,
    block,
    cotype_instance_identities,
    equalize,
    from_haar_coeffs,
    glue,
    mds_to_cotype_instance,
    normalize_mds,
    pad,
    subsequence,
    validate,
)
from mtype_lab.operators import OperatorSpec, identity_operator
from mtype_lab.samples import random_haar_coeffs, random_mds, rational_sphere_point, unit_difference_mds
from mtype_lab.scalars import ONE, ZERO, QuadRational
from mtype_lab.stepfn import L1, L2, LINF, IntervalPartition, StepFunction, dyadic_partition, l2_norm_sq

F = Fraction
Q = QuadRational
seeds = st.integers(0, 2 ** 32 - 1)


def total_sq(m, norm):
    return l2_norm_sq(m.total(), norm)


def test_validate_examples():
    ok = MDS((haar_fn(1, 1),), Filtration((IntervalPartition.trivial(), dyadic_partition(1))))
    assert validate(ok)
    bad = MDS((StepFunction.constant((ONE,)),), Filtration((IntervalPartition.trivial(), IntervalPartition.trivial())))
    rep = validate(bad)
    assert not rep and rep.violations
    # not measurable: a level-2 function against F_1
    bad2 = MDS((haar_fn(2, 1),), Filtration((IntervalPartition.trivial(), dyadic_partition(1))))
    assert not validate(bad2)


def test_from_haar_coeffs_examples():
    c = HaarCoefficients(1, 1, 1, {(1, 1): (ONE,)})
    m = from_haar_coeffs(c)
    assert len(m) == 1 and validate(m) and m.differences[0] == haar_fn(1, 1)
    for n in range(1, 5):
        m = from_haar_coeffs(summation_cotype_witness(n))
        assert len(m) == n and validate(m)
    z = from_haar_coeffs(HaarCoefficients(1, 3, 2, {}))
    assert len(z) == 3 and all(d.is_zero() for d in z.differences)


@given(seeds, st.integers(1, 4), st.integers(1, 3))
def test_random_mds_valid(seed, n, d):
    rng = np.random.default_rng(seed)
    assert validate(random_mds(rng, n, d, quad=True, initial_cells=2))
    assert validate(from_haar_coeffs(random_haar_coeffs(rng, 1, n, d)))


@given(seeds, st.integers(1, 3), st.sampled_from([1, 2, 3, 5]))
def test_glue_identities(seed, n, mod):
    rng = np.random.default_rng(seed)
    m = random_mds(rng, n, 2, initial_cells=2)
    g = glue(m, mod)
    assert len(g) == mod * n and validate(g)
    for norm in (L1, L2, LINF):
        assert total_sq(g, norm) == total_sq(m, norm)
        before = m.norms_sq(norm)
        after = g.norms_sq(norm)
        for k, x in enumerate(before):
            assert all(y * mod == x for y in after[k * mod:(k + 1) * mod])


def test_glue_mod_one_is_identity():
    m = random_mds(np.random.default_rng(1), 3, 2)
    g = glue(m, 1)
    assert g.differences == m.differences


def test_block_sums_consecutive_differences():
    m = random_mds(np.random.default_rng(2), 4, 2)
    b = block(m, [1, 3])
    assert validate(b) and len(b) == 2
    assert b.differences[1] == m.differences[1] + m.differences[2] + m.differences[3]
    with pytest.raises(ValueError):
        block(m, [2, 3])


@pytest.mark.parametrize("n", [1, 2, 3])
def test_equalize_norms_and_sum(n):
    rng = np.random.default_rng(n)
    m = unit_difference_mds(rng, 2, [ONE] * n)
    e = equalize(m, L1)
    assert len(e) == n + 1 and validate(e)
    for norm in (L1, L2, LINF):
        assert all(x == F(n, n + 1) for x in e.norms_sq(norm))
    assert e.total() == glue(m, n + 1).total()
    assert total_sq(e, L1) == total_sq(m, L1)


def test_equalize_rejects_unequal_norms():
    m = unit_difference_mds(np.random.default_rng(0), 2, [ONE, Q(2)])
    with pytest.raises(MartingaleError):
        equalize(m, L1)


@settings(max_examples=20)
@given(seeds, st.integers(1, 4))
def test_normalize_mds_bounds(seed, n):
    rng = np.random.default_rng(seed)
    scales = [Q(x) for x in rational_sphere_point(rng, n)]
    m = unit_difference_mds(rng, 2, scales)
    T = identity_operator(2, L1)
    if not any(scales):
        return
    try:
        res = normalize_mds(m, T)
    except MartingaleError:
        # every index too small for a bucket: only possible when all norms are tiny
        assert all(s * s <= F(1, 4 ** 3) for s in scales)
        return
    out = res.bucketed
    assert validate(out)
    assert len(out) <= 16 * n and res.mod <= 16 * n < 4 * res.mod
    for x in out.norms_sq(L1):
        assert F(1, res.mod) < x <= F(4, res.mod)
    for k in res.discarded:
        assert scales[k - 1] * scales[k - 1] <= F(1, res.mod)


def test_normalize_examples():
    T = identity_operator(2, L1)
    h = Q(F(1, 2))
    m = unit_difference_mds(np.random.default_rng(4), 2, [h] * 4)
    res = normalize_mds(m, T)
    assert len({h for h, ks in res.buckets.items() if ks}) == 1 and not res.discarded
    # 4^l <= 64 -> mod 64 for n = 4; norm^2 1/64 lies in no bucket
    sc = [Q(F(1, 8)), Q(F(3, 4)), Q(F(3, 8)), Q(0, F(3, 8))]
    assert sum((x * x for x in sc), ZERO) == 1
    res = normalize_mds(unit_difference_mds(np.random.default_rng(5), 2, sc), T)
    assert res.discarded == [1]
    with pytest.raises(MartingaleError):
        normalize_mds(unit_difference_mds(np.random.default_rng(5), 2, [ONE, ONE]), T)


def test_pad_and_subsequence():
    m = random_mds(np.random.default_rng(8), 2, 1)
    p = pad(m, 5)
    assert len(p) == 5 and validate(p) and p.total() == m.total()
    s = subsequence(m, [2])
    assert validate(s) and s.differences[0] == m.differences[1]


@pytest.mark.parametrize("N", [1, 2, 4, 8])
def test_cotype_instance_identities(N):
    rng = np.random.default_rng(N)
    m = random_mds(rng, N, 2, initial_cells=2, max_splits=1)
    for T in (identity_operator(2, L1), OperatorSpec([[1, 1], [0, 1]], L1, LINF)):
        rep = cotype_instance_identities(m, T)
        assert rep["F_norm"] and rep["coefficients"] and rep["contraction"] and rep["triangle"], rep["failures"]


def test_cotype_instance_single_difference():
    m = random_mds(np.random.default_rng(3), 1, 2)
    inst = mds_to_cotype_instance(m)
    assert inst.coeffs.n == 0 and inst.coefficient_function((0, 0)) == m.differences[0]
    with pytest.raises(MartingaleError):
        mds_to_cotype_instance(random_mds(np.random.default_rng(3), 3, 1))


def test_json_round_trip():
    m = random_mds(np.random.default_rng(9), 3, 2, quad=True)
    assert MDS.from_json(m.to_json()).differences == m.differences
