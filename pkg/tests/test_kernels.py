import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.optimize import linprog

from unilab import _pykernels
from unilab import kernels as K
from unilab.kernels import backends

finite = st.floats(-50, 50, allow_nan=False, allow_infinity=False)
vectors = arrays(np.float64, st.integers(1, 12), elements=finite)


def test_both_backends_listed():
    assert "python" in backends()


@pytest.mark.parametrize("name", sorted(backends()))
@settings(max_examples=60, deadline=None)
@given(v=vectors)
def test_simplex_projection_kkt(name, v):
    t = backends()[name].project_simplex(v, 1.0)
    assert np.all(t >= 0) and abs(t.sum() - 1) < 1e-9
    # optimality: v - t is constant on the support and no larger off it
    r = v - t
    supp = t > 1e-12
    assert np.ptp(r[supp]) < 1e-9 if supp.any() else True
    if (~supp).any():
        assert r[~supp].max() <= r[supp].min() + 1e-9


@pytest.mark.parametrize("name", sorted(backends()))
@settings(max_examples=60, deadline=None)
@given(v=vectors, radius=st.floats(0.1, 10))
def test_l1_ball_projection_is_nonexpansive_and_feasible(name, v, radius):
    k = backends()[name]
    t = k.project_l1_ball(v, radius)
    assert np.abs(t).sum() <= radius + 1e-9
    # the projection is no farther from v than any feasible probe
    rng = np.random.default_rng(0)
    for _ in range(10):
        p = k.project_l1_ball(rng.normal(size=v.size) * 3, radius)
        assert np.linalg.norm(v - t) <= np.linalg.norm(v - p) + 1e-9


def test_projection_examples(kern):
    assert np.allclose(kern.project_simplex(np.array([2.0, 0.0, 0.0]), 1.0), [1, 0, 0])
    assert np.allclose(kern.project_simplex(np.array([0.8, 0.4]), 1.0), [0.7, 0.3])
    c = np.array([1.0, 0.0])
    assert np.allclose(kern.project_ball(np.array([3.0, 0.0]), c, 0.5), [1.5, 0.0])
    assert np.allclose(kern.project_ball(np.array([1.0, 0.2]), c, 0.5), [1.0, 0.2])


def test_backends_agree_on_kernels(rng):
    ks = backends()
    G = rng.normal(size=(50, 9))
    ref = _pykernels.simplex_excess_rows(G, 4.0)
    for k in ks.values():
        assert np.allclose(k.simplex_excess_rows(G, 4.0), ref, atol=1e-12)
    signs = np.array([1.0, -1.0, 1.0, 0, 0, 0, 0, 0, 0])
    refl = _pykernels.l1_polar_min_rows(G, signs, 1e-12)
    for k in ks.values():
        assert np.allclose(k.l1_polar_min_rows(G, signs, 1e-12), refl, atol=1e-9)


def test_pg_quadratic_box_free_minimum(kern, rng):
    # minimizer of 0.5 t'Mt + q't over a large ball is the unconstrained one
    B = rng.normal(size=(8, 5))
    M = B.T @ B + np.eye(5)
    q = rng.normal(size=5)
    L = float(np.linalg.eigvalsh(M)[-1])
    t, iters, gm = kern.pg_quadratic(M, q, np.zeros(5), K.SET_BALL, np.zeros(5), 100.0, L, 20000, 1e-12)
    assert np.allclose(t, np.linalg.solve(M, -q), atol=1e-8)
    assert gm <= 1e-12 * 10


def test_lp_simplex_matches_scipy(kern, rng):
    for trial in range(30):
        m, n = 4, 9
        A = rng.normal(size=(m, n))
        x0 = np.abs(rng.normal(size=n))
        b = A @ x0
        c = np.abs(rng.normal(size=n)) + 0.1
        status, x, y, iters, _ = kern.lp_simplex(A, b, c, 1e-9, 10000)
        ref = linprog(c, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
        assert status == K.LP_OPTIMAL
        assert abs(c @ x - ref.fun) <= 1e-7 * (1 + abs(ref.fun))
        assert abs(b @ y - c @ x) <= 1e-7 * (1 + abs(ref.fun))


def test_lp_simplex_infeasible(kern):
    status, *_ = kern.lp_simplex(np.array([[1.0]]), np.array([-1.0]), np.array([1.0]), 1e-9, 100)
    assert status == K.LP_INFEASIBLE
