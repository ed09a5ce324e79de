import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unilab import geometry as geo
from unilab.models import SeedSpec, gaussian, sample_matrix, sparse_rademacher
from unilab.oracles import bp_exhaustive
from unilab.results import INFEASIBLE
from unilab.solvers import (
    DecodeInstance,
    LpProblem,
    RecoveryInstance,
    basis_pursuit,
    lasso_objective,
    lp_solve,
    msep,
    planted_sparse,
    sketch_error_ratio,
    solve_decode,
    solve_l1_min,
    solve_lasso_constrained,
    solve_sketched_ls,
)


def test_lp_examples():
    rep = lp_solve(LpProblem(np.array([1.0]), np.array([[1.0]]), np.array([1.0])))
    assert rep.ok and rep.value == pytest.approx(1.0)
    rep = lp_solve(LpProblem(np.array([1.0]), np.array([[1.0]]), np.array([-1.0])))
    assert rep.status == INFEASIBLE
    with pytest.raises(ValueError):
        LpProblem(np.ones(2), np.ones((1, 3)), np.ones(1))


def test_lp_matches_exhaustive_oracle():
    rng = np.random.default_rng(5)
    for _ in range(200):
        n = int(rng.integers(3, 11))
        m = int(rng.integers(1, min(6, n - 1) + 1))
        Phi = rng.normal(size=(m, n))
        y = rng.normal(size=m)
        rep = basis_pursuit(Phi, y)
        assert rep.ok
        assert abs(rep.value - bp_exhaustive(Phi, y)) <= 1e-6


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_basis_pursuit_feasible_and_no_worse_than_planted(s):
    rng = np.random.default_rng(s)
    Phi = rng.normal(size=(8, 16))
    x = np.zeros(16)
    x[rng.choice(16, 3, replace=False)] = rng.normal(size=3)
    inst = RecoveryInstance.from_signal(Phi, x)
    xh, _ = solve_l1_min(inst)
    assert np.linalg.norm(Phi @ xh - inst.y) <= 1e-8 * (1 + np.linalg.norm(inst.y))
    assert np.abs(xh).sum() <= np.abs(x).sum() + 1e-8
    rep = basis_pursuit(Phi, inst.y)
    assert rep.residuals["gap"] <= 1e-8 * (1 + abs(rep.value))


def test_l1_min_examples():
    rng = np.random.default_rng(0)
    Phi = rng.normal(size=(6, 6))
    x = np.array([0, 1.0, 0, 0, -2, 0])
    xh, ok = solve_l1_min(RecoveryInstance.from_signal(Phi, x))
    assert ok and np.allclose(xh, x)
    xh, ok = solve_l1_min(RecoveryInstance.from_signal(Phi, np.zeros(6)))
    assert ok and np.all(xh == 0)
    wins = sum(solve_l1_min(RecoveryInstance.random(gaussian(), 40, 64, 8, SeedSpec(i)))[1] for i in range(100))
    assert wins >= 90


def test_planted_sparse():
    x = planted_sparse(50, 7, SeedSpec(3), magnitudes="unit")
    assert np.count_nonzero(x) == 7 and set(np.abs(x[x != 0])) == {1.0}
    assert np.count_nonzero(planted_sparse(50, 7, SeedSpec(3))) == 7


def test_decode_examples():
    inst = DecodeInstance.random(gaussian(), 40, 10, 0, SeedSpec(1))
    x, z, ok = solve_decode(inst)
    assert ok and np.allclose(z, 0, atol=1e-9) and np.allclose(x, inst.x_star)
    inst = DecodeInstance.random(gaussian(), 30, 0, 3, SeedSpec(2))
    x, z, ok = solve_decode(inst)
    assert ok and x.size == 0 and np.allclose(z, inst.z_star, atol=1e-7)
    inst = DecodeInstance.random(sparse_rademacher(0.2), 100, 20, 10, SeedSpec(3))
    x, z, _ = solve_decode(inst)
    assert np.linalg.norm(inst.Phi @ x + z - inst.y) <= 1e-8 * (1 + np.linalg.norm(inst.y))
    m = sparse_rademacher(0.2)
    wins = sum(solve_decode(DecodeInstance.random(m, 256, 64, 40, SeedSpec(i)))[2] for i in range(100))
    assert wins >= 90


def test_sketched_ls_examples():
    rng = np.random.default_rng(13)
    A = rng.normal(size=(30, 4))
    y = rng.normal(size=30)
    exact = np.linalg.lstsq(A, y, rcond=None)[0]
    assert np.allclose(solve_sketched_ls(A, y, np.eye(30)).x, exact)
    x = rng.normal(size=4)
    assert np.allclose(solve_sketched_ls(A, A @ x, rng.normal(size=(10, 30))).x, x)
    A = sample_matrix(gaussian(), 500, 20, SeedSpec(13, 0, "A"))
    y = rng.normal(size=500)
    xs = np.linalg.lstsq(A, y, rcond=None)[0]
    Pi = sample_matrix(gaussian(), 100, 500, SeedSpec(13))
    assert sketch_error_ratio(A, xs, y, solve_sketched_ls(A, y, Pi).x) <= 30 / 80


def test_lasso_examples():
    rng = np.random.default_rng(21)
    X = rng.normal(size=(10, 10))
    y = rng.normal(size=10)
    assert np.allclose(solve_lasso_constrained(X, y, 0.0).x, 0)
    ols = np.linalg.solve(X, y)
    rep = solve_lasso_constrained(X, y, np.abs(ols).sum() + 1)
    assert np.allclose(rep.x, ols, atol=1e-5)
    # an interior-radius solve is feasible and beats random feasible probes
    rep = solve_lasso_constrained(X, y, 1.0)
    assert np.abs(rep.x).sum() <= 1.0 + 1e-10
    for _ in range(50):
        p = rng.normal(size=10)
        p *= rng.random() / np.abs(p).sum()
        assert lasso_objective(X, y, rep.x) <= lasso_objective(X, y, p) + 1e-9


def test_lasso_msep_single_instance():
    s = SeedSpec(21)
    X = sample_matrix(gaussian(), 200, 64, s.child("design"))
    beta = planted_sparse(64, 16, s.child("beta"), magnitudes="unit")
    y = X @ beta + np.random.default_rng(21).normal(size=200)
    rep = solve_lasso_constrained(X, y, 16.0)
    bound = 1.2 * 200 / (200 - 64 * geo.psi_l1(0.25))
    assert msep(rep.x, beta, 1.0) <= bound


def test_msep_examples():
    b = np.array([1.0, -2.0, 0.5])
    assert msep(b, b, 1.0) == 1.0
    assert msep(b + np.array([1.0, 0, 0]), b, 0.0) == 1.0
    h = np.array([0.3, 0.1, -0.7])
    assert msep(h, b, 0.5) == pytest.approx(math.fsum((h - b) ** 2) + 0.25)


def test_gaussian_sketch_ratio_follows_exact_law():
    # for a Gaussian sketch the error ratio is distributed as chi2_n / chi2_(d-n+1)
    from scipy import stats

    rng = np.random.default_rng(8)
    D, n, d = 120, 5, 25
    A = rng.normal(size=(D, n))
    y = rng.normal(size=D)
    xs = np.linalg.lstsq(A, y, rcond=None)[0]
    r = [sketch_error_ratio(A, xs, y, solve_sketched_ls(A, y, sample_matrix(gaussian(), d, D, SeedSpec(8, i))).x) for i in range(600)]
    ref = rng.chisquare(n, 200000) / rng.chisquare(d - n + 1, 200000)
    assert stats.ks_2samp(r, ref).pvalue > 1e-3
