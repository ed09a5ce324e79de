import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unilab import geometry as geo
from unilab.models import SeedSpec
from unilab.oracles import chi_mean, norm_expectation

S = SeedSpec(2024)


def test_descriptor_invariants():
    B = geo.SubspaceSphere.random(7, 20, S).basis
    assert np.allclose(B.T @ B, np.eye(7), atol=1e-10)
    with pytest.raises(ValueError):
        geo.L1DescentCap((), (), 5)
    with pytest.raises(ValueError):
        geo.L1DescentCap((0,), (2,), 5)
    with pytest.raises(ValueError):
        geo.ShiftedBall(0.0, 4)


def test_parse_and_describe():
    T = geo.parse_set("subspace:k=10,D=50")
    assert isinstance(T, geo.SubspaceSphere) and T.k == 10 and T.D == 50
    assert geo.describe(geo.parse_set("orthant:D=64")) == "orthant:D=64"
    with pytest.raises(ValueError):
        geo.parse_set("orthant:D=64,k=3")
    with pytest.raises(ValueError):
        geo.parse_set("torus:D=3")


def test_spherical_retraction():
    assert np.allclose(geo.spherical_retraction([3.0, 4.0]), [0.6, 0.8])
    assert np.array_equal(geo.spherical_retraction(np.zeros(3)), np.zeros(3))
    u = np.array([0.0, 1.0, 0.0])
    assert np.allclose(geo.spherical_retraction(u), u)


def test_support_value_examples():
    assert geo.support_value(geo.OrthantSphere(2), np.array([1.0, -1.0])) == pytest.approx(1.0)
    assert geo.support_value(geo.Simplex(3), np.array([0.2, 0.7, -1.0])) == pytest.approx(0.7)
    assert geo.support_value(geo.ShiftedBall(0.5, 2), np.array([1.0, 0.0])) == pytest.approx(1.5)
    assert geo.support_value(geo.OrthantSphere(3), -np.ones(3)) == 0.0


def test_l1_polar_distance_examples():
    assert geo.l1_polar_distance_sq(np.array([1.0, 0.0]), (0,), (1,), 1.0) == pytest.approx(0.0)
    g = np.array([1.5, -0.3, 2.0])
    assert geo.l1_polar_distance_sq(g, (0,), (1,), 0.0) == pytest.approx(g @ g)
    assert geo.l1_polar_distance_sq(np.array([2.0, 0.5]), (0,), (1,), 1.0) == pytest.approx(1.0)


def test_statistical_dimension_examples():
    est = geo.statistical_dimension(geo.OrthantSphere(64), 100000, S)
    assert abs(est.value - 32) <= 3 * est.std_error
    est = geo.statistical_dimension(geo.SubspaceSphere.coordinate(10, 50), 100000, S)
    assert abs(est.value - 10) <= 3 * est.std_error
    est = geo.statistical_dimension(geo.Sphere(20), 100000, S)
    assert abs(est.value - 20) <= 3 * est.std_error
    with pytest.raises(ValueError):
        geo.statistical_dimension(geo.Sphere(3), 10, S)


def test_gaussian_width_examples():
    assert abs(geo.gaussian_width(geo.Simplex(1), 10000, S).value) < 0.05
    w = geo.gaussian_width(geo.Sphere(100), 100000, S).value
    assert 9.9 <= w <= 10.0
    assert abs(chi_mean(100) - norm_expectation(100, 200000)) < 0.01
    W = geo.gaussian_width(geo.OrthantSphere(64), 100000, S)
    d = geo.statistical_dimension(geo.OrthantSphere(64), 100000, S)
    assert d.value - 1 <= W.value**2 <= d.value


def test_excess_width_examples():
    est = geo.excess_width(geo.SubspaceSphere.coordinate(9, 40), 25.0, 50000, S)
    assert abs(est.value - (5 - 3)) <= 3 * est.std_error + 1
    est = geo.excess_width(geo.Sphere(30), 30.0, 50000, S)
    assert 0 < est.value < 1
    assert abs(est.value - (math.sqrt(30) - chi_mean(30))) <= 4 * est.std_error
    for T in (geo.Simplex(16), geo.OrthantSphere(16), geo.L1DescentCap.leading(3, 16)):
        e = geo.excess_width(T, 9.0, 5000, S)
        assert 3 - 4 - 3 * e.std_error <= e.value <= 3 + 3 * e.std_error


def test_ball_excess_scales_linearly():
    a = geo.excess_width(geo.ShiftedBall(0.5, 16), 8.0, 5000, S).value
    b = geo.excess_width(geo.ShiftedBall(0.5, 16, scale=2.0), 8.0, 5000, S).value
    assert b == pytest.approx(2 * a, rel=1e-12)


def test_simplex_inner_min_examples():
    rep = geo.simplex_inner_min(np.array([0.7]), 4.0)
    assert rep.value == pytest.approx(2.7) and np.allclose(rep.x, [1.0])
    rep = geo.simplex_inner_min(np.full(9, -0.4), 4.0)
    assert rep.value == pytest.approx(2 / 3 - 0.4)
    g = np.array([0.0, 1.0, 2.0])
    rep = geo.simplex_inner_min(g, 4.0)
    fw = geo.frank_wolfe_simplex(g, 4.0, 500)
    assert abs(rep.value - fw.value) <= 1e-4
    assert rep.ok and not rep.degraded


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 10), st.floats(0.5, 30), st.integers(0, 10**6))
def test_simplex_inner_min_is_optimal(D, m, s):
    g = np.random.default_rng(s).normal(size=D) * 2
    rep = geo.simplex_inner_min(g, m)
    assert abs(rep.x.sum() - 1) < 1e-9 and np.all(rep.x >= -1e-12)
    assert rep.value <= geo.frank_wolfe_simplex(g, m, 500).value + 1e-9
    rng = np.random.default_rng(s + 1)
    for _ in range(20):
        t = rng.dirichlet(np.ones(D))
        assert rep.value <= math.sqrt(m) * np.linalg.norm(t) + g @ t + 1e-9


def test_psi_examples():
    assert geo.psi_l1(0.0) == 0.0 and geo.psi_l1(1.0) == 1.0
    assert geo.psi_l1_inverse(0.0) == 0.0 and geo.psi_l1_inverse(1.0) == 1.0
    assert geo.psi_l1_inverse(geo.psi_l1(0.3)) == pytest.approx(0.3, abs=1e-8)
    est = geo.statistical_dimension(geo.L1DescentCap.leading(16, 64), 20000, S)
    assert abs(64 * geo.psi_l1(0.25) - est.value) <= 2 * 8
    with pytest.raises(ValueError):
        geo.psi_l1(1.5)


def test_psi_shape():
    grid = np.linspace(0, 1, 101)
    v = np.array([geo.psi_l1(r) for r in grid])
    assert np.all(np.diff(v) > 0)
    # the curve bends downward
    assert np.all(np.diff(v, 2) <= 1e-12)


def test_simplex_asymptotic_examples():
    v = geo.simplex_excess_width_asymptotic(32, 64)
    est = geo.excess_width(geo.Simplex(64), 32.0, 20000, S)
    assert abs(max(v, 0.0) - est.value) <= 0.15 * math.sqrt(32)
    assert geo.simplex_excess_width_asymptotic(40, 64) > geo.simplex_excess_width_asymptotic(24, 64)
    assert geo.simplex_excess_width_asymptotic(60, 64) > 0


def test_project_examples():
    assert np.allclose(geo.project(geo.Simplex(3), np.array([2.0, 0, 0])), [1, 0, 0])
    assert np.allclose(geo.project(geo.Simplex(2), np.array([0.8, 0.4])), [0.7, 0.3])
    e1 = np.array([1.0, 0, 0])
    assert np.allclose(geo.project(geo.ShiftedBall(0.5, 3), e1), e1)
    t = geo.project(geo.L1Sublevel(np.array([1.0, -1.0])), np.array([5.0, 0.0]))
    assert np.abs(t).sum() <= 4 + 1e-12
    with pytest.raises(geo.UnsupportedSetError):
        geo.project(geo.OrthantSphere(3), e1)


def test_asymptotic_matches_monte_carlo_above_transition():
    v = geo.simplex_excess_width_asymptotic(64, 64)
    est = geo.excess_width(geo.Simplex(64), 64.0, 20000, S)
    assert abs(v - est.value) <= 0.15 * 8
