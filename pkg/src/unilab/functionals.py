"""Restricted singular values, the l1 restricted minimum, the RAP functional, embedding tests."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import lsq_linear, minimize

from unilab import kernels
from unilab.geometry import (
    L1DescentCap,
    L1Sublevel,
    OrthantSphere,
    ShiftedBall,
    Simplex,
    Sphere,
    SubspaceSphere,
    UnsupportedSetError,
)
from unilab.linalg import as_dense, orthonormal_range, sigma_max, sigma_min, singular_values
from unilab.models import SeedSpec, box_muller
from unilab.results import CONVERGED, MAX_ITER, OPTIMAL, SolverReport
from unilab.solvers import LpProblem, SolverConfig, SolverFailure, basis_pursuit, lp_solve

EMBED_RANK_RTOL = 1e-8


@dataclass(frozen=True, eq=False)
class RsvQuery:
    matrix: np.ndarray
    set: object
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        A = as_dense(self.matrix)
        if A.shape[1] != self.set.D:
            raise ValueError(f"matrix has {A.shape[1]} columns but the set lives in R^{self.set.D}")
        object.__setattr__(self, "matrix", A)


def _pg_set(T):
    D = T.D
    if isinstance(T, Simplex):
        return kernels.SET_SIMPLEX, np.zeros(D), 1.0, np.full(D, 1.0 / D)
    if isinstance(T, ShiftedBall):
        return kernels.SET_BALL, T.center, T.radius, T.center
    if isinstance(T, L1Sublevel):
        return kernels.SET_L1, T.anchor, T.radius, np.zeros(D)
    raise UnsupportedSetError(f"no projected-gradient route for {type(T).__name__}")


_PG_CHUNK = 500


def _fw_gap(T, grad, t) -> float:
    """grad.t - min over T of grad.x; bounds the suboptimality of a convex objective."""
    if isinstance(T, Simplex):
        low = float(grad.min())
    elif isinstance(T, ShiftedBall):
        low = float(grad @ T.center) - T.radius * float(np.linalg.norm(grad))
    else:
        low = -float(grad @ T.anchor) - T.radius * float(np.abs(grad).max())
    return max(0.0, float(grad @ t) - low)


def _simplex_bvls(A):
    """Minimizer of ||A t|| over the simplex via bounded-variable least squares, or None.

    With u >= 0 minimizing ||A u||^2 + (sum(u) - 1)^2, the KKT conditions of the
    bounded problem are those of the simplex problem at t = u / sum(u).
    """
    d, D = A.shape
    E = np.vstack([A, np.ones((1, D))])
    f = np.zeros(d + 1)
    f[d] = 1.0
    res = lsq_linear(E, f, bounds=(0.0, np.inf), method="bvls", tol=1e-15, max_iter=50 * D)
    tot = float(res.x.sum())
    return np.maximum(res.x, 0.0) / tot if tot > 0.0 else None


def _value_gap(A, T, t):
    At = A @ t
    v = float(np.linalg.norm(At))
    f_low = 0.5 * v * v - _fw_gap(T, A.T @ At, t)
    return v, v - math.sqrt(max(2.0 * f_low, 0.0))


def rsv_min(query: RsvQuery) -> SolverReport:
    """inf over t in T of ||A t||."""
    A, T, cfg = query.matrix, query.set, query.solver
    if isinstance(T, Sphere):
        return SolverReport(sigma_min(A), None, 0, {}, OPTIMAL)
    if isinstance(T, SubspaceSphere):
        return SolverReport(sigma_min(A @ T.basis), None, 0, {}, OPTIMAL)
    kind, center, radius, t0 = _pg_set(T)
    smax = sigma_max(A)
    if smax == 0.0:
        return SolverReport(0.0, t0.copy(), 0, {"gradient_mapping": 0.0}, CONVERGED)
    # both stopping rules are relative to the scale of A, so rsv_min(cA) = |c| rsv_min(A)
    L = smax * smax
    tol = cfg.tolerance * L
    if isinstance(T, Simplex):
        t = _simplex_bvls(A)
        if t is not None:
            v, vgap = _value_gap(A, T, t)
            if vgap <= cfg.value_tolerance * smax:
                return SolverReport(v, t, 0, {"value_gap": float(vgap)}, CONVERGED)
            t0 = t
    M = A.T @ A
    zero = np.zeros(T.D)
    t, total, gm, vgap = t0, 0, math.inf, math.inf
    # restart in chunks so a Frank-Wolfe gap can certify the value early
    while total < cfg.max_iters:
        chunk = min(_PG_CHUNK, cfg.max_iters - total)
        t, iters, gm = kernels.pg_quadratic(M, zero, t, kind, center, float(radius), L, chunk, tol)
        t = np.asarray(t)
        total += int(iters)
        v, vgap = _value_gap(A, T, t)
        if gm <= tol or vgap <= cfg.value_tolerance * smax:
            break
    status = CONVERGED if (gm <= tol or vgap <= cfg.value_tolerance * smax) else MAX_ITER
    res = {"gradient_mapping": float(gm), "value_gap": float(vgap)}
    return SolverReport(float(np.linalg.norm(A @ t)), t, total, res, status)


def rsv_max(query: RsvQuery) -> SolverReport:
    """max over t in T of ||A t||."""
    A, T = query.matrix, query.set
    if isinstance(T, Simplex):
        norms = np.linalg.norm(A, axis=0)
        j = int(np.argmax(norms))
        x = np.zeros(T.D)
        x[j] = 1.0
        return SolverReport(float(norms[j]), x, 0, {}, OPTIMAL)
    if isinstance(T, Sphere):
        return SolverReport(sigma_max(A), None, 0, {}, OPTIMAL)
    if isinstance(T, SubspaceSphere):
        return SolverReport(sigma_max(A @ T.basis), None, 0, {}, OPTIMAL)
    raise UnsupportedSetError(f"rsv_max is not available for {type(T).__name__}")


def _ball_null_point(A, T) -> np.ndarray | None:
    """A point of null(A) inside the shifted ball, when one exists.

    The projection w of the center onto null(A) satisfies ||w - c||^2 = c^2 - ||w||^2
    (c = scale), so w lies in the ball iff ||w||^2 >= scale^2 (1 - alpha^2).
    """
    R = orthonormal_range(A.T)
    e1 = np.zeros(T.D)
    e1[0] = T.scale
    w = e1 - R @ (R.T @ e1)
    if float(w @ w) >= T.scale**2 * (1.0 - T.alpha**2):
        return w
    return None


def l1_rsv_min(A, T, solver: SolverConfig = SolverConfig(), rtol: float = 1e-3) -> SolverReport:
    """min over the shifted ball of ||A t||_1.

    Solved through the dual  max_{|u|_inf <= 1} u.A c - r ||A^T u||  (box-constrained
    quasi-Newton); the primal point c - r A^T u / ||A^T u|| certifies the gap.
    """
    if not isinstance(T, ShiftedBall):
        raise UnsupportedSetError("l1_rsv_min is defined on the shifted ball")
    A = as_dense(A)
    if A.shape[1] != T.D:
        raise ValueError("matrix columns must match the set dimension")
    c, r = T.center, T.radius
    b = A @ c
    if not np.any(A):
        return SolverReport(0.0, c.copy(), 0, {"gap": 0.0}, CONVERGED)
    w = _ball_null_point(A, T)
    if w is not None:
        return SolverReport(float(np.abs(A @ w).sum()), w, 0, {"gap": 0.0}, CONVERGED)

    def neg_dual(u):
        v = A.T @ u
        nv = math.sqrt(float(v @ v))
        val = float(u @ b) - r * nv
        grad = b - (r / nv) * (A @ v) if nv > 0.0 else b.copy()
        return -val, -grad

    def primal_point(u):
        v = A.T @ u
        nv = np.linalg.norm(v)
        return c - r * v / nv if nv > 0.0 else c.copy()

    best_t, best_val, best_dual = c.copy(), float(np.abs(b).sum()), -math.inf
    u0 = np.sign(b)
    iters = 0
    for attempt in range(3):
        res = minimize(
            neg_dual,
            u0,
            jac=True,
            method="L-BFGS-B",
            bounds=[(-1.0, 1.0)] * A.shape[0],
            options={"maxiter": solver.max_iters, "ftol": 1e-15, "gtol": 1e-12},
        )
        iters += int(res.nit)
        best_dual = max(best_dual, -float(res.fun))
        t = primal_point(res.x)
        val = float(np.abs(A @ t).sum())
        if val < best_val:
            best_t, best_val = t, val
        if best_val - best_dual <= rtol * max(best_val, 1e-12):
            break
        u0 = res.x + 1e-3 * box_muller(SeedSpec(attempt).generator(), A.shape[0])
        u0 = np.clip(u0, -1.0, 1.0)
    gap = best_val - best_dual
    status = CONVERGED if gap <= rtol * max(best_val, 1e-12) else MAX_ITER
    return SolverReport(best_val, best_t, iters, {"gap": gap, "dual": best_dual}, status)


def _cone_lp_feasible(Pi) -> bool:
    """Is there t >= 0 with sum t = 1 and Pi t = 0?"""
    d, D = Pi.shape
    A = np.vstack([Pi, np.ones((1, D))])
    b = np.zeros(d + 1)
    b[-1] = 1.0
    rep = lp_solve(LpProblem(np.zeros(D), A, b), 1e-9)
    if rep.status == "infeasible":
        return False
    if rep.ok:
        return True
    raise SolverFailure(f"cone feasibility LP ended with status {rep.status}", rep)


def embedding_succeeds(Pi, T) -> bool:
    """True iff the null space of Pi misses the set (after radial retraction)."""
    Pi = as_dense(Pi)
    d, D = Pi.shape
    if D != T.D:
        raise ValueError("map columns must match the set dimension")
    if not np.any(Pi):
        return False
    if isinstance(T, Sphere):
        s = singular_values(Pi)
        return d >= D and s[-1] > EMBED_RANK_RTOL * s[0]
    if isinstance(T, SubspaceSphere):
        smax = sigma_max(Pi)
        return sigma_min(Pi @ T.basis) > EMBED_RANK_RTOL * smax
    if isinstance(T, (OrthantSphere, Simplex)):
        return not _cone_lp_feasible(Pi)
    if isinstance(T, L1DescentCap):
        x_star = T.planted_point()
        rep = basis_pursuit(Pi, Pi @ x_star)
        if not rep.ok:
            raise SolverFailure(f"basis pursuit ended with status {rep.status}", rep)
        return float(np.linalg.norm(rep.x - x_star)) <= 1e-5 * max(1.0, float(np.linalg.norm(x_star)))
    if isinstance(T, ShiftedBall):
        # the cone over the ball is {t : t1 >= sqrt(1 - alpha^2) ||t||}; it meets
        # null(Pi) away from 0 iff ||P_null e1|| >= sqrt(1 - alpha^2)
        return _ball_null_point(Pi, T) is None
    raise UnsupportedSetError(f"embedding_succeeds is not available for {type(T).__name__}")


def _orthant_strict_certificate(A) -> np.ndarray | None:
    """A unit t with A t <= 0 (so the RAP value is exactly zero), if an LP finds one."""
    D, d = A.shape
    # A(p - q) + w = -1,  p, q, w >= 0
    M = np.hstack([A, -A, np.eye(D)])
    rep = lp_solve(LpProblem(np.zeros(2 * d + D), M, -np.ones(D)), 1e-9)
    if not rep.ok:
        return None
    t = rep.x[:d] - rep.x[d : 2 * d]
    nrm = np.linalg.norm(t)
    return t / nrm if nrm > 0 else None


def rap_tau_min(A, T, solver: SolverConfig = SolverConfig(), seed: SeedSpec = SeedSpec(0)) -> SolverReport:
    """min over unit t and polar points s of ||s - A t|| for a D x d matrix A.

    Subspaces are exact (sigma_min of the component in the subspace).  For the
    orthant the polar is the nonpositive orthant and the objective is
    ||(A t)_+||; an LP looks for an exact zero first, otherwise alternating
    projection from random starts returns an upper bound flagged heuristic.
    """
    A = as_dense(A)
    if A.shape[0] != T.D:
        raise ValueError(f"matrix has {A.shape[0]} rows but the set lives in R^{T.D}")
    d = A.shape[1]
    if isinstance(T, SubspaceSphere):
        return SolverReport(sigma_min(T.basis.T @ A), None, 0, {}, OPTIMAL)
    if not isinstance(T, OrthantSphere):
        raise UnsupportedSetError(f"rap_tau_min is not available for {type(T).__name__}")
    if not np.any(A):
        return SolverReport(0.0, np.eye(d)[0], 0, {}, OPTIMAL)
    t = _orthant_strict_certificate(A)
    if t is not None:
        return SolverReport(float(np.linalg.norm(np.maximum(A @ t, 0.0))), t, 0, {}, OPTIMAL)

    pinv = np.linalg.pinv(A)
    best_val, best_t = math.inf, None
    total = 0
    for k in range(solver.restarts):
        t = box_muller(seed.child(f"restart{k}").generator(), d)
        t /= np.linalg.norm(t)
        prev = math.inf
        for _ in range(solver.max_iters):
            total += 1
            v = A @ t
            val = float(np.linalg.norm(np.maximum(v, 0.0)))
            if val < best_val:
                best_val, best_t = val, t.copy()
            if prev - val <= solver.tolerance * max(1.0, val):
                break
            prev = val
            # pull the polar point back through A, then renormalize
            w = pinv @ np.minimum(v, 0.0)
            nw = np.linalg.norm(w)
            if nw == 0.0:
                break
            t = w / nw
    return SolverReport(best_val, best_t, total, {}, CONVERGED, heuristic=True)
