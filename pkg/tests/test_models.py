import math

import numpy as np
import pytest

from unilab.models import (
    ModelError,
    SeedSpec,
    box_muller,
    entry_moment_check,
    gaussian,
    model_from_config,
    parse_model,
    rademacher,
    sample_matrix,
    sparse_rademacher,
    sparsified,
    student_t,
)

ALL = [gaussian(), rademacher(), sparse_rademacher(0.2), student_t(5), sparsified(gaussian(), 0.5)]


def test_seed_streams_reproducible_and_distinct():
    a = sample_matrix(gaussian(), 5, 5, SeedSpec(1, 2, "x"))
    b = sample_matrix(gaussian(), 5, 5, SeedSpec(1, 2, "x"))
    assert np.array_equal(a, b)
    for other in (SeedSpec(2, 2, "x"), SeedSpec(1, 3, "x"), SeedSpec(1, 2, "y"), SeedSpec(1, 2, "x").child("z")):
        assert not np.array_equal(a, sample_matrix(gaussian(), 5, 5, other))


def test_box_muller_is_standard_normal():
    z = box_muller(np.random.default_rng(0), 200000)
    assert abs(z.mean()) < 0.01 and abs(z.var() - 1) < 0.01
    assert abs(np.mean(z**4) - 3) < 0.05


def test_rademacher_entries():
    A = sample_matrix(rademacher(), 30, 30, SeedSpec(4))
    assert set(np.unique(A)) == {-1.0, 1.0}


def test_sparse_rademacher_fraction_and_values():
    m = sparse_rademacher(0.2)
    fr = [np.mean(sample_matrix(m, 64, 64, SeedSpec(0, i)) != 0) for i in range(100)]
    assert abs(np.mean(fr) - 0.2) <= 0.01
    vals = np.unique(np.abs(sample_matrix(m, 64, 64, SeedSpec(1))))
    assert np.allclose(vals[vals > 0], 0.2**-0.5)


@pytest.mark.parametrize("model", ALL, ids=lambda m: m.name)
def test_standardized_and_symmetric(model):
    X = np.concatenate([sample_matrix(model, 200, 200, SeedSpec(9, i)).ravel() for i in range(50)])
    assert abs(X.mean()) <= 0.01
    assert 0.97 <= X.var() <= 1.03
    assert abs(np.mean(np.sign(X) * np.minimum(np.abs(X), 5) ** 3)) < 0.05


def test_moment_check_examples():
    est = entry_moment_check(gaussian(), 2, 100000, SeedSpec(0))
    assert abs(est.value - 1) <= 3 * est.std_error
    assert entry_moment_check(rademacher(), 4, 1000, SeedSpec(0)).value == 1.0
    est = entry_moment_check(sparse_rademacher(0.25), 4, 100000, SeedSpec(0))
    assert abs(est.value - 4) <= 3 * est.std_error


def test_moment_bounds_declared():
    assert rademacher().declared_nu == 1.0
    m = sparse_rademacher(0.2)
    assert m.declared_nu == pytest.approx(0.2 ** (1 / m.declared_p - 0.5))
    assert student_t(5).declared_p < 5


def test_invalid_models():
    for bad in (lambda: student_t(3), lambda: sparse_rademacher(0.0), lambda: sparse_rademacher(1.5)):
        with pytest.raises(ModelError):
            bad()
    with pytest.raises(ModelError):
        parse_model("cauchy")
    with pytest.raises(ModelError):
        model_from_config({"kind": "gaussian", "alpha": 0.3})
    with pytest.raises(ModelError):
        sample_matrix(gaussian(), 0, 3, SeedSpec(0))


def test_parse_and_config_round_trip():
    assert parse_model("student_t(5)") == student_t(5)
    assert parse_model("sparse_rademacher(0.2)").name == "sparse_rademacher(0.2)"
    assert model_from_config({"kind": "student_t", "dof": 5}) == student_t(5)
    m = model_from_config({"kind": "sparsified", "alpha": 0.5, "base": {"kind": "rademacher"}})
    assert m.name == "sparsified(rademacher,0.5)"
    assert math.isfinite(m.declared_nu)
