"""One function per experiment kind: a single seeded trial, plus reference curves."""
from __future__ import annotations

import math

import numpy as np

from unilab import geometry as geo
from unilab.functionals import RsvQuery, embedding_succeeds, l1_rsv_min, rsv_max, rsv_min
from unilab.linalg import least_squares, sigma_min
from unilab.models import SeedSpec, box_muller, gaussian, sample_matrix
from unilab.solvers import (
    DecodeInstance,
    RecoveryInstance,
    SolverFailure,
    msep,
    planted_sparse,
    sketch_error_ratio,
    solve_decode,
    solve_l1_min,
    solve_lasso_constrained,
    solve_sketched_ls,
)

RSV_ACCEPT_GAP = 1e-4


def heatmap_window(spec, x) -> list:
    """y values for column x: either the explicit axis or a window around the reference curve."""
    if spec.y is not None:
        return list(spec.y)
    center = reference_value(spec, x)
    c = int(round(center))
    w = spec.y_window
    if spec.kind == "l1_heatmap":
        lo, hi = 1, spec.params["n"]
    else:
        lo, hi = 0, x
    return [v for v in range(c - w, c + w + 1) if lo <= v <= hi]


def cells(spec) -> list:
    if spec.y is None and spec.y_window is None:
        return [(x, None) for x in spec.x]
    return [(x, y) for x in spec.x for y in heatmap_window(spec, x)]


def reference_value(spec, x) -> float:
    k, p = spec.kind, spec.params
    if k == "rsv_curve":
        return max(0.0, geo.simplex_excess_width_asymptotic(int(x), spec.set.D))
    if k == "l1_heatmap":
        n = p["n"]
        return n * geo.psi_l1(x / n)
    if k == "decode_heatmap":
        m = p["m"]
        return x * geo.psi_l1_inverse(1.0 - m / x) if x >= m else 0.0
    if k == "lasso_curve":
        thr = p["p"] * geo.psi_l1(p["s"] / p["p"])
        return x / (x - thr) if x > thr else math.inf
    if k == "sketch_ls":
        n = p["n"]
        return (n + p["iota"] * x) / (x - n) if x > n else math.inf
    if k == "baiyin":
        return 1.0 - math.sqrt(p["rho"])
    raise KeyError(k)


def reference_rows(spec) -> list:
    """(cell_x, cell_y, value, std_error) rows drawn as reference marks."""
    k = spec.kind
    if k == "embed_sweep":
        est = geo.statistical_dimension(spec.set, int(spec.params["sdim_samples"]), SeedSpec(spec.master_seed, 0, "reference/sdim"))
        return [(None, None, est.value, est.std_error)]
    if k == "nonuniversality_l1rsv":
        T = spec.set
        return [(None, None, T.alpha**2 * T.D, 0.0)]
    if k in ("nonuniversality_maxsv", "functional_report"):
        return []
    return [(x, None, reference_value(spec, x), 0.0) for x in spec.x]


# ---------------------------------------------------------------------------
# trials: each returns (value, success) or raises SolverFailure


def _embed(spec, model, cell, seed):
    Pi = sample_matrix(model, int(cell[0]), spec.set.D, seed.child("map"))
    ok = embedding_succeeds(Pi, spec.set)
    return float(ok), ok


def _rsv(spec, model, cell, seed):
    Pi = sample_matrix(model, int(cell[0]), spec.set.D, seed.child("map"))
    rep = rsv_min(RsvQuery(Pi, spec.set))
    if not rep.ok and rep.residuals.get("value_gap", math.inf) > RSV_ACCEPT_GAP * max(1.0, rep.value):
        raise SolverFailure("restricted singular value did not converge", rep)
    return rep.value, None


def _l1(spec, model, cell, seed):
    s, m = int(cell[0]), int(cell[1])
    inst = RecoveryInstance.random(model, m, spec.params["n"], s, seed)
    _, ok = solve_l1_min(inst)
    return float(ok), ok


def _decode(spec, model, cell, seed):
    n, s = int(cell[0]), int(cell[1])
    inst = DecodeInstance.random(model, n, spec.params["m"], s, seed)
    _, _, ok = solve_decode(inst)
    return float(ok), ok


def _lasso(spec, model, cell, seed):
    n = int(cell[0])
    p, s, sigma = int(spec.params["p"]), int(spec.params["s"]), float(spec.params["sigma"])
    X = sample_matrix(model, n, p, seed.child("design"))
    beta = planted_sparse(p, s, seed.child("beta"), magnitudes="unit")
    z = box_muller(seed.child("noise").generator(), n)
    y = X @ beta + sigma * z
    rep = solve_lasso_constrained(X, y, float(np.abs(beta).sum()))
    if not rep.ok:
        raise SolverFailure("LASSO did not converge", rep)
    return msep(rep.x, beta, sigma) / (sigma * sigma), None


def sketch_problem(spec):
    """The fixed least-squares instance shared by every sketch trial."""
    D, n = int(spec.params["D"]), int(spec.params["n"])
    base = SeedSpec(spec.master_seed, 0, "sketch/problem")
    A = sample_matrix(gaussian(), D, n, base.child("A"))
    y = box_muller(base.child("y").generator(), D)
    x_star = least_squares(A, y).x
    return A, y, x_star


def _sketch(spec, model, cell, seed, _cache={}):
    key = (spec.master_seed, spec.params["D"], spec.params["n"])
    if key not in _cache:
        _cache.clear()
        _cache[key] = sketch_problem(spec)
    A, y, x_star = _cache[key]
    d = int(cell[0])
    Pi = sample_matrix(model, d, A.shape[0], seed.child("sketch"))
    rep = solve_sketched_ls(A, y, Pi)
    if not rep.ok:
        raise SolverFailure("sketched least squares is rank deficient", rep)
    ratio = sketch_error_ratio(A, x_star, y, rep.x)
    return ratio, ratio <= reference_value(spec, d)


def _baiyin(spec, model, cell, seed):
    d = int(cell[0])
    k = int(math.floor(spec.params["rho"] * d))
    Pi = sample_matrix(model, d, k, seed.child("map"))
    return sigma_min(Pi) / math.sqrt(d), None


def _l1rsv(spec, model, cell, seed):
    Pi = sample_matrix(model, int(cell[0]), spec.set.D, seed.child("map"))
    rep = l1_rsv_min(Pi, spec.set)
    if not rep.ok:
        raise SolverFailure("l1 restricted singular value did not converge", rep)
    return rep.value, None


def _maxsv(spec, model, cell, seed):
    Pi = sample_matrix(model, int(cell[0]), spec.set.D, seed.child("map"))
    return rsv_max(RsvQuery(Pi, spec.set)).value, None


TRIALS = {
    "embed_sweep": _embed,
    "rsv_curve": _rsv,
    "l1_heatmap": _l1,
    "decode_heatmap": _decode,
    "lasso_curve": _lasso,
    "sketch_ls": _sketch,
    "baiyin": _baiyin,
    "nonuniversality_l1rsv": _l1rsv,
    "nonuniversality_maxsv": _maxsv,
}

RATE_KINDS = frozenset({"embed_sweep", "l1_heatmap", "decode_heatmap"})


def functional_rows(spec) -> list:
    """(functional, cell_x, estimate) for a functional report."""
    T = spec.set
    n = int(spec.params["samples"])
    seed = SeedSpec(spec.master_seed, 0, "functional")
    rows = [
        ("sdim", None, geo.statistical_dimension(T, n, seed)),
        ("width", None, geo.gaussian_width(T, n, seed)),
    ]
    for m in spec.x:
        rows.append(("excess", m, geo.excess_width(T, float(m), n, seed)))
    return rows
