"""Invariant suite behind ``unilab check``.

Each check is a small randomized experiment with a fixed seed that returns
(passed, detail).  The suite is deterministic and finishes in a few minutes on
one core.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from unilab import geometry as geo
from unilab import linalg
from unilab.functionals import RsvQuery, embedding_succeeds, rap_tau_min, rsv_min
from unilab.models import (
    SeedSpec,
    box_muller,
    entry_moment_check,
    gaussian,
    rademacher,
    sample_matrix,
    sparse_rademacher,
    student_t,
)
from unilab.oracles import bp_exhaustive, isotonic_fit
from unilab.solvers import (
    DecodeInstance,
    LpProblem,
    RecoveryInstance,
    SolverConfig,
    basis_pursuit,
    lasso_objective,
    lp_solve,
    solve_decode,
    solve_l1_min,
    solve_lasso_constrained,
)

CHECKS = []


def check(module: str):
    def deco(fn):
        CHECKS.append((module, fn.__name__, fn))
        return fn

    return deco


@dataclass(frozen=True)
class CheckResult:
    module: str
    name: str
    passed: bool
    detail: str
    seconds: float


def _rng(seed, label):
    return SeedSpec(seed, 0, f"check/{label}").generator()


# ---------------------------------------------------------------------------
# linalg


@check("linalg")
def qr_and_svd_reconstruct(seed):
    rng = _rng(seed, "qr")
    worst = 0.0
    for _ in range(50):
        m = int(rng.integers(2, 30))
        n = int(rng.integers(1, m + 1))
        A = rng.standard_normal((m, n))
        Q, R = linalg.qr_factor(A)
        s = linalg.svd(A)
        worst = max(
            worst,
            np.linalg.norm(Q @ R - A) / np.linalg.norm(A),
            np.linalg.norm(Q.T @ Q - np.eye(n)),
            np.linalg.norm(s.reconstruct() - A) / np.linalg.norm(A),
        )
        if np.any(np.diff(s.singular_values) > 0):
            return False, "singular values not sorted"
    return worst < 1e-12, f"worst relative error {worst:.2e}"


@check("linalg")
def projector_and_least_squares(seed):
    rng = _rng(seed, "proj")
    worst = 0.0
    for _ in range(50):
        A = rng.standard_normal((20, int(rng.integers(1, 10))))
        P = linalg.projector_onto_range(A)
        y = rng.standard_normal(20)
        rep = linalg.least_squares(A, y)
        worst = max(worst, np.abs(P @ P - P).max(), np.abs(P - P.T).max(), np.abs(A.T @ (A @ rep.x - y)).max())
    return worst < 1e-10, f"worst residual {worst:.2e}"


# ---------------------------------------------------------------------------
# random models


@check("random-models")
def models_are_standardized(seed):
    bad = []
    for model in (gaussian(), rademacher(), sparse_rademacher(0.2), student_t(5)):
        e1 = entry_moment_check(model, 2, 200000, SeedSpec(seed, 0, model.name))
        x = model.entries(SeedSpec(seed, 1, model.name).generator(), 200000)
        mean_z = abs(x.mean()) / (x.std() / math.sqrt(x.size))
        if abs(e1.value - 1.0) > max(5 * e1.std_error, 0.02) or mean_z > 5:
            bad.append(model.name)
    return not bad, "all standardized" if not bad else f"off: {bad}"


@check("random-models")
def streams_are_reproducible(seed):
    s = SeedSpec(seed, 3, "x")
    a = sample_matrix(student_t(6), 5, 7, s)
    b = sample_matrix(student_t(6), 5, 7, s)
    c = sample_matrix(student_t(6), 5, 7, s.trial(4))
    return bool(np.array_equal(a, b) and not np.array_equal(a, c)), "same seed equal, next trial differs"


# ---------------------------------------------------------------------------
# geometry


@check("geometry")
def subspace_monotonicity(seed):
    G = box_muller(_rng(seed, "mono"), (2000, 30))
    small = geo.SubspaceSphere.coordinate(5, 30)
    big = geo.SubspaceSphere.coordinate(12, 30)
    ds, db = geo.sdim_samples(small, G), geo.sdim_samples(big, G)
    es, eb = geo.excess_samples(small, G, 20.0), geo.excess_samples(big, G, 20.0)
    ok = np.all(ds <= db + 1e-12) and np.all(es >= eb - 1e-12)
    return bool(ok), "per-sample inclusion order holds"


@check("geometry")
def orthant_polarity(seed):
    a = geo.statistical_dimension(geo.OrthantSphere(64), 20000, SeedSpec(seed, 0, "pol-a"))
    b = geo.statistical_dimension(geo.OrthantSphere(64), 20000, SeedSpec(seed, 0, "pol-b"))
    err = abs(a.value + b.value - 64)
    tol = 6 * math.hypot(a.std_error, b.std_error)
    return err <= tol, f"|sum - 64| = {err:.3f} (tol {tol:.3f})"


@check("geometry")
def width_sandwich(seed):
    sets = [
        geo.Sphere(20),
        geo.SubspaceSphere.coordinate(7, 30),
        geo.OrthantSphere(40),
        geo.L1DescentCap.leading(6, 40),
    ]
    worst = []
    for T in sets:
        s = SeedSpec(seed, 0, "sandwich")
        d = geo.statistical_dimension(T, 20000, s)
        w = geo.gaussian_width(T, 20000, s)
        tol = 3 * (d.std_error + 2 * abs(w.value) * w.std_error)
        lo, hi = w.value**2 - tol, w.value**2 + 1 + tol
        if not lo <= d.value <= hi:
            worst.append(geo.describe(T))
    return not worst, "W^2 <= delta <= W^2 + 1 on all families" if not worst else f"violated: {worst}"


@check("geometry")
def ball_excess_homogeneous(seed):
    G = box_muller(_rng(seed, "homog"), (500, 16))
    a = geo.excess_samples(geo.ShiftedBall(0.5, 16), G, 9.0)
    b = geo.excess_samples(geo.ShiftedBall(0.5, 16, scale=2.5), G, 9.0)
    err = float(np.abs(b - 2.5 * a).max())
    return err < 1e-12 * max(1.0, float(np.abs(b).max())), f"max deviation {err:.2e}"


@check("geometry")
def excess_range(seed):
    G = box_muller(_rng(seed, "range"), (2000, 32))
    norms = np.linalg.norm(G, axis=1)
    m = 12.0
    bad = []
    # per draw on unit-norm sets; in mean on every compact set inside the unit ball
    for T in (geo.Sphere(32), geo.OrthantSphere(32), geo.SubspaceSphere.coordinate(4, 32), geo.L1DescentCap.leading(5, 32)):
        e = geo.excess_samples(T, G, m)
        if np.any(e > math.sqrt(m) + 1e-12) or np.any(e < math.sqrt(m) - norms - 1e-12):
            bad.append(geo.describe(T))
    for T in (geo.Simplex(32), geo.ShiftedBall(0.3, 32)):
        est = geo.excess_width(T, m, 2000, SeedSpec(seed, 0, "range"))
        slack = 3 * est.std_error
        if not math.sqrt(m) - math.sqrt(32) - slack <= est.value <= math.sqrt(m) + slack:
            bad.append(geo.describe(T))
    return not bad, "excess width within [sqrt(m) - ||g||, sqrt(m)]" if not bad else f"violated: {bad}"


@check("geometry")
def simplex_inner_vs_frank_wolfe(seed):
    rng = _rng(seed, "fw")
    worst = -math.inf
    for _ in range(100):
        D = int(rng.integers(1, 40))
        m = float(rng.uniform(0.5, 50))
        g = rng.standard_normal(D)
        rep = geo.simplex_inner_min(g, m)
        fw = geo.frank_wolfe_simplex(g, m)
        obj = math.sqrt(m) * np.linalg.norm(rep.x) + g @ rep.x
        if rep.value > fw.value + 1e-4 or rep.value < obj - 1e-12:
            return False, f"D={D} m={m:.2f}: {rep.value} vs FW {fw.value}"
        worst = max(worst, rep.value - fw.value)
    return True, f"max(exact - FW) = {worst:.2e}"


@check("geometry")
def psi_increasing_concave(seed):
    r = np.linspace(0, 1, 101)
    v = np.array([geo.psi_l1(x) for x in r])
    d1 = np.diff(v)
    d2 = np.diff(v, 2)
    ok = v[0] == 0.0 and v[-1] == 1.0 and np.all(d1 > 0) and np.all(d2 <= 1e-9)
    return bool(ok), f"min slope {d1.min():.2e}, max second difference {d2.max():.2e}"


@check("geometry")
def psi_inverse_round_trip(seed):
    worst = max(abs(geo.psi_l1(geo.psi_l1_inverse(y)) - y) for y in np.linspace(0, 1, 41))
    return worst <= 1e-8, f"max error {worst:.2e}"


# ---------------------------------------------------------------------------
# functionals


@check("functionals")
def rsv_inclusion_and_scaling(seed):
    rng = _rng(seed, "rsv")
    for i in range(20):
        A = rng.standard_normal((12, 20))
        Q = geo.SubspaceSphere.random(8, 20, SeedSpec(seed, i, "basis")).basis
        small, big = geo.SubspaceSphere(Q[:, :4]), geo.SubspaceSphere(Q)
        if rsv_min(RsvQuery(A, big)).value > rsv_min(RsvQuery(A, small)).value + 1e-12:
            return False, "inclusion order violated"
        for T in (geo.Simplex(20), geo.ShiftedBall(0.4, 20), geo.Sphere(20)):
            base = rsv_min(RsvQuery(A, T)).value
            for c in (-2.0, 0.5):
                v = rsv_min(RsvQuery(c * A, T)).value
                if abs(v - abs(c) * base) > 1e-9 * max(1.0, abs(c) * base):
                    return False, f"scale {c} on {geo.describe(T)}: {v} vs {abs(c) * base}"
        if abs(rsv_min(RsvQuery(A.T, geo.Sphere(12))).value - linalg.sigma_min(A.T)) > 1e-8:
            return False, "sphere rsv differs from sigma_min"
    return True, "inclusion, scaling, sphere agree"


@check("functionals")
def subspace_embedding_agrees_with_rsv(seed):
    mismatches = 0
    for i in range(200):
        rng = _rng(seed, f"emb{i}")
        d = int(rng.integers(2, 12))
        k = int(rng.integers(1, 10))
        Pi = rng.standard_normal((d, 12))
        T = geo.SubspaceSphere.random(k, 12, SeedSpec(seed, i, "q"))
        thr = 1e-8 * linalg.sigma_max(Pi)
        if embedding_succeeds(Pi, T) != (rsv_min(RsvQuery(Pi, T)).value > thr):
            mismatches += 1
    return mismatches == 0, f"{mismatches} mismatches in 200"


@check("functionals")
def rap_positive_implies_failure(seed):
    clash = 0
    positive = 0
    cfg = SolverConfig(max_iters=200, restarts=5)
    for i in range(100):
        d = 16 + (i % 24)
        Pi = sample_matrix(gaussian(), d, 48, SeedSpec(seed, i, "rap"))
        rep = rap_tau_min(Pi.T, geo.OrthantSphere(48), cfg, SeedSpec(seed, i, "restarts"))
        if rep.value > 0.2:
            positive += 1
            if embedding_succeeds(Pi, geo.OrthantSphere(48)):
                clash += 1
    return clash == 0, f"{positive} positive RAP values, {clash} co-occur with success"


# ---------------------------------------------------------------------------
# solvers


@check("solvers")
def lp_matches_exhaustive_oracle(seed):
    rng = _rng(seed, "lp")
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(2, 11))
        m = int(rng.integers(1, min(6, n) + 1))
        Phi = rng.standard_normal((m, n))
        x = np.zeros(n)
        k = int(rng.integers(0, m + 1))
        x[rng.permutation(n)[:k]] = rng.standard_normal(k)
        y = Phi @ x
        rep = basis_pursuit(Phi, y)
        ref = bp_exhaustive(Phi, y)
        if not rep.ok:
            return False, f"LP status {rep.status}"
        worst = max(worst, abs(rep.value - ref))
    return worst <= 1e-6, f"max gap {worst:.2e}"


@check("solvers")
def lp_duality_and_feasibility(seed):
    rng = _rng(seed, "dual")
    worst_gap = worst_feas = 0.0
    for _ in range(100):
        m, n = int(rng.integers(1, 15)), int(rng.integers(15, 40))
        A = rng.standard_normal((m, n))
        b = A @ rng.uniform(0, 1, n)
        c = rng.uniform(0.1, 2.0, n)
        rep = lp_solve(LpProblem(c, A, b))
        if not rep.ok:
            return False, f"status {rep.status}"
        worst_gap = max(worst_gap, rep.residuals["gap"] / (1 + abs(rep.value)))
        worst_feas = max(worst_feas, rep.residuals["primal"] / (1 + np.linalg.norm(b)))
    inf = lp_solve(LpProblem([1.0], [[1.0]], [-1.0]))
    ok = worst_gap <= 1e-9 and worst_feas <= 1e-9 and inf.status == "infeasible"
    return ok, f"gap {worst_gap:.1e}, feasibility {worst_feas:.1e}, infeasible detected: {inf.status}"


@check("solvers")
def basis_pursuit_and_decoding_consistency(seed):
    for i in range(30):
        inst = RecoveryInstance.random(gaussian(), 20, 40, 5, SeedSpec(seed, i, "bp"))
        xh, _ = solve_l1_min(inst)
        if np.linalg.norm(inst.Phi @ xh - inst.y) > 1e-8 * (1 + np.linalg.norm(inst.y)):
            return False, "basis pursuit infeasible"
        if np.abs(xh).sum() > np.abs(inst.x_star).sum() + 1e-8:
            return False, "basis pursuit not optimal"
        dec = DecodeInstance.random(sparse_rademacher(0.2), 60, 16, 6, SeedSpec(seed, i, "dec"))
        x, z, _ = solve_decode(dec)
        if np.linalg.norm(dec.Phi @ x + z - dec.y) > 1e-8 * (1 + np.linalg.norm(dec.y)):
            return False, "decoding change of variables broken"
    return True, "feasibility, l1 optimality and y = Phi x + z hold"


@check("solvers")
def lasso_feasible_and_optimal(seed):
    rng = _rng(seed, "lasso")
    for i in range(10):
        X = rng.standard_normal((40, 30))
        y = rng.standard_normal(40)
        r = float(rng.uniform(0.5, 3))
        rep = solve_lasso_constrained(X, y, r)
        if np.abs(rep.x).sum() > r + 1e-10:
            return False, "LASSO iterate infeasible"
        for _ in range(20):
            probe = rng.standard_normal(30)
            probe *= rng.uniform(0, r) / np.abs(probe).sum()
            if lasso_objective(X, y, probe) < rep.value - 1e-9:
                return False, "a random feasible probe beats the LASSO solution"
    return True, "feasible and no probe does better"


# ---------------------------------------------------------------------------
# experiments


@check("experiments-cli")
def runs_deterministic_and_round_trip(seed):
    from unilab.experiments import run_experiment, spec_from_dict
    from unilab.experiments.table import format_rows, parse_rows

    doc = {
        "experiment": {"kind": "embed_sweep", "trials": 10, "seed": seed, "sdim_samples": 1000},
        "set": {"family": "orthant", "D": 24},
        "grid": {"x": {"from": 4, "to": 24, "step": 4}},
        "models": [{"kind": "gaussian"}, {"kind": "rademacher"}],
    }
    spec = spec_from_dict(doc)
    one = format_rows(run_experiment(spec, threads=1))
    two = format_rows(run_experiment(spec, threads=2))
    back = format_rows(parse_rows(one))
    return one == two and back == one, "threads=1 and threads=2 byte-identical; CSV round-trips"


@check("experiments-cli")
def embed_curves_nearly_monotone(seed):
    from unilab.experiments import run_experiment, spec_from_dict

    doc = {
        "experiment": {"kind": "embed_sweep", "trials": 30, "seed": seed, "sdim_samples": 1000},
        "set": {"family": "orthant", "D": 32},
        "grid": {"x": {"from": 8, "to": 28, "step": 2}},
        "models": [{"kind": "gaussian"}],
    }
    rows = [r for r in run_experiment(spec_from_dict(doc)) if r.model == "gaussian"]
    rates = np.array([r.mean for r in rows])
    resid = float(np.abs(isotonic_fit(rates) - rates).max())
    return resid <= 0.15, f"isotonic residual {resid:.3f}"


def run_checks(seed: int = 2024, only: str | None = None) -> list:
    out = []
    for module, name, fn in CHECKS:
        if only and only not in (module, name):
            continue
        t0 = time.perf_counter()
        try:
            ok, detail = fn(seed)
        except Exception as exc:  # a crash is a failed invariant, not a crashed suite
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(module, name, bool(ok), detail, time.perf_counter() - t0))
    return out
