"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import itertools
import json
import math
import subprocess
import sys
import time
from contextlib import contextmanager
from fractions import Fraction

import numpy as np

from mtype_lab.cli import main
from mtype_lab.factorization import build_factorization, summation_matrix, verify_factorization
from mtype_lab.haar import analyze, haar_fn, synthesize, tree
from mtype_lab.ideal_norms import (
    diagonal_type_exact,
    diagonal_type_witness,
    estimate,
    haar_ratio,
    martingale_ratio,
    summation_cotype_witness,
    summation_witness_function,
    type_p_ratio,
)
from mtype_lab.martingales import (
    MDS,
    cotype_instance_identities,
    equalize,
    from_haar_coeffs,
    glue,
    normalize_mds,
    validate,
)
from mtype_lab.operators import (
    OperatorSpec,
    apply,
    apply_l2,
    diagonal_operator,
    identity_operator,
    summation_operator,
)
from mtype_lab.samples import (
    random_haar_coeffs,
    random_mds,
    rational_sphere_point,
    unit_difference_mds,
)
from mtype_lab.scalars import ONE, ZERO, QuadRational
from mtype_lab.stepfn import L1, L2, LINF, dyadic_partition, conditional_expectation, l2_norm_sq, pairing

F = Fraction
Q = QuadRational


@contextmanager
def criterion(capsys, number, text):
    try:
        yield
    except BaseException:
        with capsys.disabled():
            print(f"\n[FAIL] criterion {number}: {text}")
        raise
    with capsys.disabled():
        print(f"\n[PASS] criterion {number}: {text}")


def test_criterion_01_summation_witness_exact(capsys):
    with criterion(capsys, 1, "summation cotype witness: per-coefficient norms, ||f||=1, ratio^2 = 1+n/4, < 5 s"):
        start = time.perf_counter()
        for n in range(1, 7):
            S = summation_operator(2 ** n)
            c = summation_cotype_witness(n)
            for k, j in tree(1, n):
                assert LINF.norm(apply(S, c[(k, j)])) == Q.sqrt2_power(-(k + 1))
            assert l2_norm_sq(summation_witness_function(n), L1) == 1
            r = haar_ratio(S, c, "cotype")
            assert r.den_sq == 1 and r.num_sq == 1 + F(n, 4)
            assert r.sq >= F(n + 1, 4)
        assert time.perf_counter() - start < 5.0


def test_criterion_02_summation_cotype_bounds(capsys):
    with criterion(capsys, 2, "estimate(Sigma_{2^n}, haar_cotype, D_0^n): lower >= (n+1)^{1/2}/2, upper <= (n+1)^{1/2}"):
        for n in range(1, 6):
            e = estimate(summation_operator(2 ** n), "haar_cotype", (0, n))
            assert 4 * e.lower_sq >= n + 1
            assert e.upper_sq <= n + 1
            assert haar_ratio(summation_operator(2 ** n), e.witness, "cotype").sq == e.lower_sq


def test_criterion_03_diagonal_type(capsys):
    with criterion(capsys, 3, "diagonal witness: ratio^2 = sum tau_k^2 exactly (p=2); p in {4/3,3/2} within 1e-9"):
        profiles = ([1, 1, 1, 1], [1, F(1, 2), F(1, 4), F(1, 8)])
        for t in profiles:
            D = diagonal_operator(t, len(t))
            for n in range(1, 5):
                r = haar_ratio(D, diagonal_type_witness(t, n, 2))
                assert r.sq == sum(F(x) ** 2 for x in t[:n])
                for p in (F(4, 3), F(3, 2)):
                    q = float(p / (p - 1))
                    want = sum(float(x) ** q for x in t[:n]) ** (1 / q)
                    got = type_p_ratio(D, diagonal_type_witness(t, n, p), p)
                    assert abs(got - want) <= 1e-9
                    assert abs(diagonal_type_exact(t, n, p).value - want) <= 1e-12


def test_criterion_04_glue_identities(capsys):
    with criterion(capsys, 4, "glue on 100 seeded MDS, mod in {2,3,5}: norms^2 scale by 1/mod, sum norm^2 preserved"):
        for seed in range(100):
            rng = np.random.default_rng([4, seed])
            n = int(rng.integers(1, 5))
            d = int(rng.integers(1, 4))
            m = random_mds(rng, n, d, quad=bool(seed % 2), initial_cells=int(rng.integers(1, 3)), max_splits=1)
            for mod in (2, 3, 5):
                g = glue(m, mod)
                assert len(g) == mod * n
                for norm in (L1, L2):
                    before, after = m.norms_sq(norm), g.norms_sq(norm)
                    for k in range(n):
                        assert all(y * mod == before[k] for y in after[k * mod:(k + 1) * mod])
                    assert l2_norm_sq(g.total(), norm) == l2_norm_sq(m.total(), norm)
            if seed % 10 == 0:
                assert validate(glue(m, 3))


def test_criterion_05_equalize(capsys):
    with criterion(capsys, 5, "equalize: n+1 differences of norm^2 n/(n+1) x input, equal type ratio"):
        ops = [identity_operator(2, L1), summation_operator(2), OperatorSpec([[1, F(1, 2)], [0, Q(0, 1)]], L1, L1)]
        for seed in range(12):
            rng = np.random.default_rng([5, seed])
            n = int(rng.integers(1, 4))
            c = Q(F(int(rng.integers(1, 4)), int(rng.integers(1, 4))))
            m = unit_difference_mds(rng, 2, [c] * n)
            e = equalize(m, L1)
            assert len(e) == n + 1 and validate(e)
            assert all(x == F(n, n + 1) * c * c for x in e.norms_sq(L1))
            for T in ops:
                if l2_norm_sq(apply_l2(T, m.total()), T.target):
                    assert martingale_ratio(T, e, "equal_norm").sq == martingale_ratio(T, m, "equal_norm").sq


def test_criterion_06_normalize(capsys):
    with criterion(capsys, 6, "normalize_mds on 100 seeded inputs: length <= 16n and 1/m < norm^2 <= 4/m"):
        T = identity_operator(2, L1)
        done = 0
        for seed in range(100):
            rng = np.random.default_rng([6, seed])
            n = int(rng.integers(1, 5))
            scales = [Q(x) for x in rational_sphere_point(rng, n)]
            m = unit_difference_mds(rng, 2, scales)
            res = normalize_mds(m, T)
            out = res.bucketed
            assert len(out) <= 16 * n
            for x in out.norms_sq(L1):
                assert F(1, res.mod) < x <= F(4, res.mod)
            if seed % 10 == 0:
                assert validate(out)
            done += 1
        assert done == 100


def test_criterion_07_cotype_instance(capsys):
    with criterion(capsys, 7, "two-variable instance: coefficient identity, ||F||^2 = 2^-n sum ||d_i||^2, factor-3 triangle"):
        ops = [identity_operator(2, L1), OperatorSpec([[1, 1], [0, 1]], L1, LINF), identity_operator(2, L2)]
        for N in (4, 8):
            for seed in range(3):
                m = random_mds(np.random.default_rng([7, N, seed]), N, 2, initial_cells=2, max_splits=1)
                for T in ops:
                    rep = cotype_instance_identities(m, T)
                    assert rep["F_norm"] and rep["coefficients"] and rep["triangle"] and rep["contraction"]


def test_criterion_08_equal_norm_definitions_agree(capsys):
    with criterion(capsys, 8, "best equal_norm ratio = best equal_norm_sup ratio on the brute-force instance set"):
        grid = [Q(0), Q(F(1, 2)), ONE, Q(F(-1, 2)), -ONE]
        ops = {1: [identity_operator(1, L1)], 2: [summation_operator(2), identity_operator(2, L1),
                                                  OperatorSpec([[1, -1], [F(1, 2), 1]], L1, L2)]}
        for n in (1, 2, 3):
            for d in (1, 2):
                bases = [unit_difference_mds(np.random.default_rng([8, n, d, s]), d, [ONE] * n) for s in range(3)]
                for T in ops[d]:
                    best_eq, best_sup = ZERO, ZERO
                    for base in bases:
                        for coef in itertools.product(grid, repeat=n):
                            if not any(coef):
                                continue
                            mm = MDS(tuple(x.scale(a) for x, a in zip(base.differences, coef)), base.filtration)
                            sup = martingale_ratio(T, mm, "equal_norm_sup", check=False).sq
                            best_sup = max(best_sup, sup)
                            if all(a * a == 1 for a in coef):
                                best_eq = max(best_eq, martingale_ratio(T, mm, "equal_norm", check=False).sq)
                    assert best_eq == best_sup


def test_criterion_09_factorization(capsys):
    with criterion(capsys, 9, "factorization through identity l1: composed matrix = Sigma_n, product <= 6 sqrt(n)/(delta r)"):
        for n in (1, 2, 3):
            T = identity_operator(2 * n, L1)
            witness = from_haar_coeffs(diagonal_type_witness([1] * (2 * n), 2 * n, 2))
            res = build_factorization(T, witness)
            assert res.matrix == summation_matrix(n)
            assert verify_factorization(res, T).ok
            r = res.witness_ratio_sq.sqrt_float()
            assert res.product_bound <= 6 * math.sqrt(n) / (float(res.delta) * r) + 1e-12


def test_criterion_10_relation_suite(capsys):
    with criterion(capsys, 10, "cmd_verify: zero violations for Sigma_4, Sigma_8, id l1^4, id l2^4, D_(1,1/2,1/4), n <= 4"):
        runs = [
            ["--builtin", "summation", "--dim", "4"],
            ["--builtin", "summation", "--dim", "8"],
            ["--builtin", "identity", "--dim", "4", "--space", "l1"],
            ["--builtin", "identity", "--dim", "4", "--space", "l2"],
            ["--builtin", "diagonal", "--t", "1,1/2,1/4"],
        ]
        for argv in runs:
            code = main(["verify", *argv, "--n", "1..4", "--output", "/dev/null"])
            assert code == 0, argv


def test_criterion_11_haar_system(capsys):
    with criterion(capsys, 11, "Haar: orthonormality to level 6, both round trips, Euclidean Parseval (exact)"):
        idx = tree(0, 6)
        fns = {key: haar_fn(*key) for key in idx}
        for a in idx:
            for b in idx:
                assert pairing(fns[a], fns[b]) == (1 if a == b else 0)
        for n in range(1, 7):
            rng = np.random.default_rng([11, n])
            c = random_haar_coeffs(rng, 0, n, 2, quad=True)
            f = synthesize(c)
            assert analyze(f, 0, n) == c
            g = random_mds(rng, 1, 2, initial_cells=3).differences[0]
            assert synthesize(analyze(g, 0, n)) == conditional_expectation(g, dyadic_partition(n))
            assert l2_norm_sq(f, L2) == sum((L2.norm_sq(v) for v in c.coeffs.values()), ZERO)


def test_criterion_12_determinism(capsys):
    with criterion(capsys, 12, "two runs of cmd_estimate with the same seed are byte-identical"):
        argv = [sys.executable, "-m", "mtype_lab.cli", "estimate", "--builtin", "summation", "--kind", "eq-mtype",
                "--n", "1..4", "--seed", "99"]
        outs = [subprocess.run(argv, capture_output=True, check=True).stdout for _ in range(2)]
        assert outs[0] == outs[1] and outs[0]
        assert json.loads(outs[0])["seed"] == 99
