"""Linear programming, basis pursuit, sparse-error decoding, sketched least squares, LASSO."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from unilab import kernels
from unilab.linalg import as_dense, least_squares, null_space, sigma_max
from unilab.models import MatrixModel, SeedSpec, box_muller, sample_matrix
from unilab.results import (
    CONVERGED,
    FAILED,
    INFEASIBLE,
    MAX_ITER,
    OPTIMAL,
    UNBOUNDED,
    SolverReport,
)

SUCCESS_RTOL = 1e-5

_LP_STATUS = {
    kernels.LP_OPTIMAL: OPTIMAL,
    kernels.LP_INFEASIBLE: INFEASIBLE,
    kernels.LP_UNBOUNDED: UNBOUNDED,
    kernels.LP_MAX_ITER: MAX_ITER,
    kernels.LP_NUMERIC: FAILED,
}


class SolverFailure(RuntimeError):
    """A numerical solve failed; the trial should be discarded and counted."""

    def __init__(self, message: str, report: SolverReport | None = None):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 20000
    tolerance: float = 1e-8
    restarts: int = 20
    value_tolerance: float = 1e-6

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if not self.tolerance >= 1e-12:
            raise ValueError("tolerance must be at least 1e-12")
        if self.restarts < 1:
            raise ValueError("restarts must be positive")


# ---------------------------------------------------------------------------
# LP


@dataclass(frozen=True, eq=False)
class LpProblem:
    """min cost.x  s.t.  eq_matrix x = eq_rhs,  x >= 0."""

    cost: np.ndarray
    eq_matrix: np.ndarray
    eq_rhs: np.ndarray

    def __post_init__(self):
        A = as_dense(self.eq_matrix, "eq_matrix")
        b = np.asarray(self.eq_rhs, dtype=np.float64).ravel()
        c = np.asarray(self.cost, dtype=np.float64).ravel()
        if A.shape[0] != b.size:
            raise ValueError(f"eq_matrix has {A.shape[0]} rows but eq_rhs has length {b.size}")
        if A.shape[1] != c.size:
            raise ValueError(f"eq_matrix has {A.shape[1]} columns but cost has length {c.size}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
            raise ValueError("LP data must be finite")
        object.__setattr__(self, "eq_matrix", A)
        object.__setattr__(self, "eq_rhs", b)
        object.__setattr__(self, "cost", c)


def lp_solve(problem: LpProblem, tolerance: float = 1e-9) -> SolverReport:
    """Two-phase revised simplex.  ``x`` is primal; residuals carry the dual and gaps."""
    A, b, c = problem.eq_matrix, problem.eq_rhs, problem.cost
    code, x, y, iters, phase1 = kernels.lp_simplex(A, b, c, tolerance, 0)
    status = _LP_STATUS[int(code)]
    if status != OPTIMAL:
        value = math.inf if status == INFEASIBLE else (-math.inf if status == UNBOUNDED else math.nan)
        return SolverReport(value, None, int(iters), {"phase1": float(phase1)}, status)
    x = np.asarray(x)
    y = np.asarray(y)
    primal = float(c @ x)
    dual = float(b @ y)
    reduced = c - A.T @ y
    res = {
        "primal": float(np.linalg.norm(A @ x - b)),
        "dual_infeasibility": float(max(0.0, -reduced.min())) if reduced.size else 0.0,
        "gap": primal - dual,
        "dual": y,
        "phase1": float(phase1),
    }
    return SolverReport(primal, x, int(iters), res, OPTIMAL)


def basis_pursuit(Phi, y, tolerance: float = 1e-9) -> SolverReport:
    """min ||x||_1 s.t. Phi x = y via the split x = u - v."""
    Phi = as_dense(Phi, "Phi")
    y = np.asarray(y, dtype=np.float64).ravel()
    n = Phi.shape[1]
    rep = lp_solve(LpProblem(np.ones(2 * n), np.hstack([Phi, -Phi]), y), tolerance)
    if not rep.ok:
        return rep
    x = rep.x[:n] - rep.x[n:]
    return SolverReport(float(np.abs(x).sum()), x, rep.iterations, rep.residuals, rep.status)


# ---------------------------------------------------------------------------
# sparse recovery


def planted_sparse(n: int, s: int, seed: SeedSpec, magnitudes: str = "gaussian") -> np.ndarray:
    """An s-sparse vector: uniform random support, Gaussian (or unit) values with random signs."""
    if not 0 <= s <= n:
        raise ValueError(f"sparsity {s} outside [0, {n}]")
    rng = seed.generator()
    x = np.zeros(n)
    if s == 0:
        return x
    support = rng.permutation(n)[:s]
    if magnitudes == "unit":
        vals = np.where(rng.random(s) < 0.5, -1.0, 1.0)
    else:
        vals = box_muller(rng, s)
        vals[vals == 0.0] = 1.0
    x[support] = vals
    return x


@dataclass(frozen=True, eq=False)
class RecoveryInstance:
    x_star: np.ndarray
    Phi: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        Phi = as_dense(self.Phi, "Phi")
        x = np.asarray(self.x_star, dtype=np.float64).ravel()
        if Phi.shape[1] != x.size:
            raise ValueError("Phi columns must match the signal length")
        object.__setattr__(self, "Phi", Phi)
        object.__setattr__(self, "x_star", x)
        object.__setattr__(self, "y", np.asarray(self.y, dtype=np.float64).ravel())

    @property
    def m(self) -> int:
        return self.Phi.shape[0]

    @property
    def n(self) -> int:
        return self.Phi.shape[1]

    @property
    def s(self) -> int:
        return int(np.count_nonzero(self.x_star))

    @classmethod
    def from_signal(cls, Phi, x_star) -> "RecoveryInstance":
        Phi = as_dense(Phi, "Phi")
        x_star = np.asarray(x_star, dtype=np.float64)
        return cls(x_star, Phi, Phi @ x_star)

    @classmethod
    def random(cls, model: MatrixModel, m: int, n: int, s: int, seed: SeedSpec) -> "RecoveryInstance":
        Phi = sample_matrix(model, m, n, seed.child("phi"))
        return cls.from_signal(Phi, planted_sparse(n, s, seed.child("signal")))


def _close(est, truth) -> bool:
    return float(np.linalg.norm(est - truth)) <= SUCCESS_RTOL * max(1.0, float(np.linalg.norm(truth)))


def solve_l1_min(inst: RecoveryInstance, tolerance: float = 1e-9):
    """Basis pursuit on the instance; returns (x_hat, success)."""
    if inst.m > inst.n:
        raise ValueError("basis pursuit expects m <= n")
    rep = basis_pursuit(inst.Phi, inst.y, tolerance)
    if not rep.ok:
        raise SolverFailure(f"basis pursuit LP ended with status {rep.status}", rep)
    return rep.x, _close(rep.x, inst.x_star)


@dataclass(frozen=True, eq=False)
class DecodeInstance:
    x_star: np.ndarray
    Phi: np.ndarray
    z_star: np.ndarray
    y: np.ndarray

    @property
    def n(self) -> int:
        return self.Phi.shape[0]

    @property
    def m(self) -> int:
        return self.Phi.shape[1]

    @classmethod
    def random(cls, model: MatrixModel, n: int, m: int, s: int, seed: SeedSpec) -> "DecodeInstance":
        Phi = sample_matrix(model, n, m, seed.child("codebook")) if m > 0 else np.zeros((n, 0))
        x = box_muller(seed.child("message").generator(), m)
        z = planted_sparse(n, s, seed.child("corruption"))
        return cls(x, Phi, z, Phi @ x + z)


def solve_decode(inst: DecodeInstance, tolerance: float = 1e-9):
    """Recover (x, z) from y = Phi x + z with z sparse; returns (x_hat, z_hat, success)."""
    Phi, y = inst.Phi, inst.y
    n, m = Phi.shape
    if m > n:
        raise ValueError("decoding expects m <= n")
    if m == 0:
        z, _ = solve_l1_min(RecoveryInstance(inst.z_star, np.eye(n), y), tolerance)
        return np.zeros(0), z, _close(z, inst.z_star)
    # rows of N^T span range(Phi)^perp; N^T z = N^T y is the projected system
    N = null_space(Phi.T)
    if N.shape[1] == 0:
        z = np.zeros(n)
    else:
        rep = basis_pursuit(N.T, N.T @ y, tolerance)
        if not rep.ok:
            raise SolverFailure(f"decoding LP ended with status {rep.status}", rep)
        z = rep.x
    ls = least_squares(Phi, y - z)
    if not ls.ok:
        raise SolverFailure("codebook is rank deficient", ls)
    x = ls.x
    ok = _close(x, inst.x_star) and _close(z, inst.z_star)
    return x, z, ok


# ---------------------------------------------------------------------------
# least squares and LASSO


def solve_sketched_ls(A, y, Pi) -> SolverReport:
    """argmin_x ||Pi (A x - y)||."""
    A = as_dense(A, "A")
    Pi = as_dense(Pi, "Pi")
    if Pi.shape[1] != A.shape[0]:
        raise ValueError("sketch columns must match the rows of A")
    return least_squares(Pi @ A, Pi @ np.asarray(y, dtype=np.float64))


def sketch_error_ratio(A, x_star, y, x_hat) -> float:
    """||A(x_hat - x_star)||^2 / ||A x_star - y||^2."""
    num = np.linalg.norm(A @ (x_hat - x_star)) ** 2
    den = np.linalg.norm(A @ x_star - y) ** 2
    return float(num / den)


def lasso_objective(X, y, beta) -> float:
    r = X @ beta - y
    return float(r @ r)


def solve_lasso_constrained(X, y, radius: float, solver: SolverConfig = SolverConfig()) -> SolverReport:
    """min ||X beta - y||^2 s.t. ||beta||_1 <= radius, by accelerated projected gradient."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    X = as_dense(X, "X")
    y = np.asarray(y, dtype=np.float64)
    p = X.shape[1]
    if radius == 0.0:
        return SolverReport(lasso_objective(X, y, np.zeros(p)), np.zeros(p), 0, {"gradient_mapping": 0.0}, CONVERGED)
    # objective scaled by 1/2: gradient X^T(X b - y), Lipschitz sigma_max(X)^2
    M = X.T @ X
    q = -(X.T @ y)
    L = sigma_max(X) ** 2
    tol = solver.tolerance * max(1.0, float(np.linalg.norm(q)))
    beta, iters, gm = kernels.pg_quadratic(
        M, q, np.zeros(p), kernels.SET_L1, np.zeros(p), float(radius), L, solver.max_iters, tol
    )
    beta = np.asarray(beta)
    status = CONVERGED if gm <= tol else MAX_ITER
    return SolverReport(lasso_objective(X, y, beta), beta, int(iters), {"gradient_mapping": float(gm)}, status)


def msep(beta_hat, beta_star, sigma: float) -> float:
    """||beta_hat - beta_star||^2 + sigma^2."""
    bh = np.asarray(beta_hat, dtype=np.float64)
    bs = np.asarray(beta_star, dtype=np.float64)
    if bh.shape != bs.shape:
        raise ValueError("beta vectors differ in shape")
    return math.fsum((bh - bs) ** 2) + sigma * sigma


__all__ = [
    "SolverConfig",
    "SolverFailure",
    "LpProblem",
    "lp_solve",
    "basis_pursuit",
    "planted_sparse",
    "RecoveryInstance",
    "solve_l1_min",
    "DecodeInstance",
    "solve_decode",
    "solve_sketched_ls",
    "sketch_error_ratio",
    "solve_lasso_constrained",
    "lasso_objective",
    "msep",
]
