from fractions import Fraction

import pytest

from mtype_lab.errors import ConstructionError, MartingaleError
from mtype_lab.factorization import (
    basis_witness,
    build_factorization,
    norming_functional,
    summation_matrix,
    verify_factorization,
)
from mtype_lab.martingales import MDS, from_haar_coeffs
from mtype_lab.ideal_norms import diagonal_type_witness
from mtype_lab.operators import OperatorSpec, apply_l2, identity_operator
from mtype_lab.scalars import ONE, QuadRational
from mtype_lab.stepfn import L1, L2, LINF, l2_norm_sq

F = Fraction


def diagonal_witness_mds(n, d):
    return from_haar_coeffs(diagonal_type_witness([1] * d, 2 * n, 2))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_identity_l1_factorization(n):
    T = identity_operator(2 * n, L1)
    res = build_factorization(T, diagonal_witness_mds(n, 2 * n))
    assert res.matrix == summation_matrix(n)
    rep = verify_factorization(res, T)
    assert rep.ok and not rep.mismatches
    assert res.product_bound <= res.witness_bound + 1e-12
    assert res.normA_sq * res.normB_sq >= 1
    assert res.indices == sorted(res.indices)


def test_n1_is_trivial():
    T = identity_operator(2, L1)
    res = build_factorization(T, basis_witness(2, 1))
    assert res.n == 1 and res.matrix == [[ONE]]


@pytest.mark.parametrize("tgt", [L1, L2, LINF])
def test_other_targets(tgt):
    T = OperatorSpec([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]], L1, tgt)
    res = build_factorization(T, basis_witness(4, 2))
    assert verify_factorization(res, T).ok


def test_norm_b_contraction():
    T = identity_operator(4, L1)
    m = basis_witness(4, 2)
    res = build_factorization(T, m)
    g_sq = None
    S = apply_l2(T, m.total())
    g = norming_functional(S, T.target)
    g_sq = l2_norm_sq(g, LINF)
    assert g_sq <= 1
    for b in res.B:
        assert l2_norm_sq(b, LINF) <= g_sq
    assert res.normB_sq <= g_sq


def test_negative_control_detects_perturbation():
    T = identity_operator(4, L1)
    res = build_factorization(T, basis_witness(4, 2))
    res.B[0] = res.B[0].scale(QuadRational(F(3, 2)))
    rep = verify_factorization(res, T)
    assert not rep.ok and (1, 1) in rep.mismatches


def test_weak_witness_fails():
    # only d_1 survives T, so at most one index can be selected
    T = OperatorSpec([[1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]], L1, L1)
    with pytest.raises(ConstructionError):
        build_factorization(T, basis_witness(4, 2))


def test_monotone_in_delta():
    T = OperatorSpec([[1, 0], [0, F(1, 5)]], L1, L1)
    m = basis_witness(2, 2)
    sets = []
    for dl in (F(1, 10), F(1, 2), F(9, 10), F(99, 100)):
        try:
            sets.append(set(build_factorization(T, m, delta=dl).selected))
        except ConstructionError:
            sets.append(set())
    for a, b in zip(sets, sets[1:]):
        assert b <= a


def test_preconditions():
    T = identity_operator(2, L1)
    m = basis_witness(2, 1)
    odd = MDS(m.differences[:1], type(m.filtration)(m.filtration.partitions[:2]))
    with pytest.raises(ValueError):
        build_factorization(T, odd)
    uneven = from_haar_coeffs(diagonal_type_witness([1, F(1, 2)], 2))
    with pytest.raises(MartingaleError):
        build_factorization(T, uneven)


def test_json_payload():
    T = identity_operator(4, L1)
    js = build_factorization(T, basis_witness(4, 2)).to_json()
    assert js["matrix"] == [[["1", "0"], ["0", "0"]], [["1", "0"], ["1", "0"]]]
    assert len(js["A"]) == len(js["B"]) == 2
