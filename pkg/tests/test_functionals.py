import math

import numpy as np
import pytest

from unilab import geometry as geo
from unilab.functionals import RsvQuery, embedding_succeeds, l1_rsv_min, rap_tau_min, rsv_max, rsv_min
from unilab.linalg import null_space
from unilab.models import SeedSpec, gaussian, rademacher, sample_matrix
from unilab.solvers import SolverConfig


def test_rsv_min_examples():
    D = 16
    assert rsv_min(RsvQuery(np.eye(D), geo.Simplex(D))).value == pytest.approx(1 / math.sqrt(D), abs=1e-6)
    assert rsv_min(RsvQuery(np.eye(D), geo.ShiftedBall(0.3, D))).value == pytest.approx(0.7, abs=1e-6)
    vals = []
    for i in range(20):
        A = sample_matrix(gaussian(), 100, 200, SeedSpec(9, i))
        vals.append(rsv_min(RsvQuery(A, geo.SubspaceSphere.coordinate(50, 200))).value)
    assert abs(np.mean(vals) - (10 - math.sqrt(50))) <= 2


def test_rsv_min_sphere_is_sigma_min():
    A = np.random.default_rng(1).normal(size=(30, 20))
    v = rsv_min(RsvQuery(A, geo.Sphere(20))).value
    assert v == pytest.approx(np.linalg.svd(A, compute_uv=False)[-1], abs=1e-8)


def test_rsv_scale_equivariance():
    A = np.random.default_rng(2).normal(size=(12, 20))
    for T in (geo.Simplex(20), geo.ShiftedBall(0.5, 20), geo.SubspaceSphere.coordinate(5, 20)):
        base = rsv_min(RsvQuery(A, T)).value
        for c in (-2.0, 0.5):
            assert rsv_min(RsvQuery(c * A, T)).value == pytest.approx(abs(c) * base, abs=1e-9, rel=1e-9)


def test_rsv_inclusion_monotone():
    A = np.random.default_rng(3).normal(size=(10, 20))
    small = rsv_min(RsvQuery(A, geo.SubspaceSphere.coordinate(3, 20))).value
    big = rsv_min(RsvQuery(A, geo.SubspaceSphere.coordinate(8, 20))).value
    assert big <= small + 1e-12


def test_rsv_max_examples():
    assert rsv_max(RsvQuery(np.eye(5), geo.Simplex(5))).value == pytest.approx(1.0)
    assert rsv_max(RsvQuery(np.diag([3.0, 1.0]), geo.Sphere(2))).value == pytest.approx(3.0)
    A = sample_matrix(gaussian(), 64, 64, SeedSpec(2))
    assert rsv_max(RsvQuery(A, geo.Simplex(64))).value == pytest.approx(np.linalg.norm(A, axis=0).max())
    with pytest.raises(geo.UnsupportedSetError):
        rsv_max(RsvQuery(A, geo.OrthantSphere(64)))


def test_l1_rsv_examples():
    T = geo.ShiftedBall(0.5, 10)
    assert l1_rsv_min(np.eye(10), T).value == pytest.approx(0.5, rel=1e-3)
    assert l1_rsv_min(np.zeros((4, 10)), T).value == pytest.approx(0.0, abs=1e-12)
    T = geo.ShiftedBall(0.5, 64)
    A = sample_matrix(rademacher(), 16, 64, SeedSpec(4))
    l1 = l1_rsv_min(A, T)
    l2 = rsv_min(RsvQuery(A, T)).value
    assert l1.ok
    assert l2 * (1 - 1e-3) - 1e-6 <= l1.value <= 4 * l2 * (1 + 1e-3) + 1e-6


def test_embedding_examples():
    assert embedding_succeeds(np.eye(8), geo.OrthantSphere(8))
    for T in (geo.OrthantSphere(8), geo.Simplex(8), geo.Sphere(8), geo.SubspaceSphere.coordinate(3, 8),
              geo.ShiftedBall(0.5, 8), geo.L1DescentCap.leading(2, 8)):
        assert not embedding_succeeds(np.zeros((4, 8)), T)
    wins = sum(embedding_succeeds(sample_matrix(gaussian(), 40, 64, SeedSpec(i)), geo.OrthantSphere(64)) for i in range(100))
    assert wins >= 80


def test_ball_embedding_threshold():
    # null-space vectors reach the cap iff ||P_null e1||^2 >= 1 - alpha^2
    T = geo.ShiftedBall(0.5, 64)
    lo = sum(embedding_succeeds(sample_matrix(gaussian(), 8, 64, SeedSpec(i)), T) for i in range(20))
    hi = sum(embedding_succeeds(sample_matrix(gaussian(), 28, 64, SeedSpec(i)), T) for i in range(20))
    assert lo <= 2 and hi >= 18


def test_subspace_embedding_matches_rsv():
    rng = np.random.default_rng(6)
    T = geo.SubspaceSphere.random(4, 12, SeedSpec(1))
    for _ in range(50):
        d = int(rng.integers(2, 8))
        A = rng.normal(size=(d, 12))
        if rng.random() < 0.3:
            A = A @ (np.eye(12) - T.basis[:, :1] @ T.basis[:, :1].T)
        assert embedding_succeeds(A, T) == (rsv_min(RsvQuery(A, T)).value > 1e-8 * np.linalg.norm(A, 2))


def test_rap_examples():
    assert rap_tau_min(np.zeros((8, 5)), geo.OrthantSphere(8)).value == 0.0
    T = geo.SubspaceSphere.coordinate(3, 8)
    A = null_space(T.basis.T)  # columns span the orthocomplement
    assert rap_tau_min(A, T).value == pytest.approx(0.0, abs=1e-12)
    Pi = sample_matrix(gaussian(), 48, 64, SeedSpec(7))
    vals = [rap_tau_min(Pi.T, geo.OrthantSphere(64), SolverConfig(restarts=20), SeedSpec(r)).value for r in range(3)]
    assert max(vals) - min(vals) <= 0.1
    rep = rap_tau_min(Pi.T, geo.OrthantSphere(64))
    assert rep.value >= 0


def test_rap_positive_never_with_success():
    for i in range(30):
        d = 16 + i
        Pi = sample_matrix(gaussian(), d, 64, SeedSpec(11, i))
        rep = rap_tau_min(Pi.T, geo.OrthantSphere(64), SolverConfig(restarts=5), SeedSpec(i))
        if rep.value > 0.2:
            assert not embedding_succeeds(Pi, geo.OrthantSphere(64))
