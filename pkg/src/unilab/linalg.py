"""Dense linear algebra at desk scale.

Matrices are plain 2-D float64 numpy arrays (row-major).  The factorizations
are LAPACK's Householder QR and the Golub-Kahan SVD driver (``gesvd``:
bidiagonalization plus implicit-shift QR sweeps); this module adds
the input contracts, rank checks, and explicit failure statuses.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from unilab.results import FAILED, OPTIMAL, RANK_DEFICIENT, SolverReport


class ContractError(ValueError):
    """An input violated an operation's precondition."""


def as_dense(A, name="matrix") -> np.ndarray:
    """Validate and return ``A`` as a finite 2-D float64 array."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise ContractError(f"{name} must be 2-D, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ContractError(f"{name} has non-finite entries")
    return A


@dataclass(frozen=True)
class SvdResult:
    singular_values: np.ndarray
    left_basis: np.ndarray
    right_basis: np.ndarray
    converged: bool = True

    def reconstruct(self) -> np.ndarray:
        return (self.left_basis * self.singular_values) @ self.right_basis.T


def qr_factor(A):
    """Thin QR of a tall matrix: returns (Q, R) with orthonormal Q, upper-triangular R."""
    A = as_dense(A)
    if A.shape[0] < A.shape[1]:
        raise ContractError(f"qr_factor needs rows >= cols, got {A.shape}")
    return np.linalg.qr(A, mode="reduced")


def svd(A) -> SvdResult:
    """Thin SVD with nonincreasing singular values.

    Non-convergence of the LAPACK driver is reported through ``converged``
    instead of an exception.
    """
    A = as_dense(A)
    k = min(A.shape)
    try:
        U, s, Vt = scipy.linalg.svd(A, full_matrices=False, lapack_driver="gesvd", check_finite=False)
    except (np.linalg.LinAlgError, ValueError):
        nan = np.full(k, np.nan)
        return SvdResult(nan, np.full((A.shape[0], k), np.nan), np.full((A.shape[1], k), np.nan), False)
    return SvdResult(s, U, Vt.T, True)


def singular_values(A) -> np.ndarray:
    return scipy.linalg.svd(as_dense(A), compute_uv=False, lapack_driver="gesvd", check_finite=False)


def sigma_min(A) -> float:
    """min over unit t of ||A t||; zero for wide matrices."""
    A = as_dense(A)
    if A.shape[0] < A.shape[1] or A.size == 0:
        return 0.0
    return float(singular_values(A)[-1])


def sigma_max(A) -> float:
    A = as_dense(A)
    if A.size == 0:
        return 0.0
    return float(singular_values(A)[0])


def _rank(s, shape) -> int:
    if s.size == 0 or s[0] == 0.0:
        return 0
    tol = max(shape) * np.finfo(float).eps * s[0]
    return int(np.sum(s > tol))


def orthonormal_range(A) -> np.ndarray:
    """Orthonormal basis (columns) for range(A)."""
    A = as_dense(A)
    res = svd(A)
    r = _rank(res.singular_values, A.shape)
    return res.left_basis[:, :r]


def null_space(A) -> np.ndarray:
    """Orthonormal basis (columns) for null(A)."""
    A = as_dense(A)
    U, s, Vt = np.linalg.svd(A, full_matrices=True)
    r = _rank(s, A.shape)
    return Vt[r:].T


def projector_onto_range(A) -> np.ndarray:
    """Orthogonal projector P onto range(A): P = P^2 = P^T."""
    A = as_dense(A)
    if A.shape[0] < 1:
        raise ContractError("projector_onto_range needs at least one row")
    Q = orthonormal_range(A)
    P = Q @ Q.T
    return 0.5 * (P + P.T)


def least_squares(A, y, rcond=1e-12) -> SolverReport:
    """Minimize ||Ax - y||^2 for a tall, full-column-rank A via Householder QR.

    ``value`` is the squared residual norm.  A diagonal entry of R below
    ``rcond`` times the largest one is reported as rank deficiency.
    """
    A = as_dense(A)
    y = np.asarray(y, dtype=np.float64)
    if A.shape[0] != y.shape[0]:
        raise ContractError(f"shape mismatch: A is {A.shape}, y has length {y.shape[0]}")
    if A.shape[0] < A.shape[1]:
        raise ContractError(f"least_squares needs rows >= cols, got {A.shape}")
    n = A.shape[1]
    if n == 0:
        return SolverReport(float(y @ y), np.zeros(0), 0, {"normal": 0.0}, OPTIMAL)
    Q, R = np.linalg.qr(A, mode="reduced")
    diag = np.abs(np.diag(R))
    if diag.max() == 0.0 or diag.min() <= rcond * diag.max():
        return SolverReport(float("nan"), None, 0, {}, RANK_DEFICIENT)
    try:
        x = np.linalg.solve(R, Q.T @ y) if n > 0 else np.zeros(0)
    except np.linalg.LinAlgError:
        return SolverReport(float("nan"), None, 0, {}, FAILED)
    r = A @ x - y
    normal = float(np.linalg.norm(A.T @ r))
    return SolverReport(float(r @ r), x, 1, {"normal": normal, "residual": float(np.linalg.norm(r))}, OPTIMAL)
