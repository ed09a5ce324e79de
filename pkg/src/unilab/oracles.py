"""Slow, independent reference computations used by the test and check suites."""
from __future__ import annotations

import itertools
import math

import numpy as np


def bp_exhaustive(Phi, y, tol: float = 1e-9) -> float:
    """min ||x||_1 s.t. Phi x = y by enumerating supports of size <= rank.

    Some optimal point of the LP is basic, so it is supported on linearly
    independent columns; each such support admits at most one solution.
    Returns inf when y is not in the range of Phi.
    """
    Phi = np.asarray(Phi, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    m, n = Phi.shape
    if not np.any(y):
        return 0.0
    best = math.inf
    scale = 1.0 + np.linalg.norm(y)
    for k in range(1, min(m, n) + 1):
        for S in itertools.combinations(range(n), k):
            B = Phi[:, S]
            if np.linalg.matrix_rank(B) < k:
                continue
            xs, *_ = np.linalg.lstsq(B, y, rcond=None)
            if np.linalg.norm(B @ xs - y) <= tol * scale:
                best = min(best, float(np.abs(xs).sum()))
    return best


def isotonic_fit(values, weights=None) -> np.ndarray:
    """Nondecreasing least-squares fit by pool-adjacent-violators."""
    v = [float(x) for x in values]
    w = [1.0] * len(v) if weights is None else [float(x) for x in weights]
    blocks = []  # [mean, weight, count]
    for x, wt in zip(v, w):
        blocks.append([x, wt, 1])
        while len(blocks) > 1 and blocks[-2][0] > blocks[-1][0]:
            m2, w2, c2 = blocks.pop()
            m1, w1, c1 = blocks.pop()
            tot = w1 + w2
            blocks.append([(m1 * w1 + m2 * w2) / tot, tot, c1 + c2])
    out = []
    for mean, _, c in blocks:
        out.extend([mean] * c)
    return np.array(out)


def norm_expectation(D: int, n_samples: int = 1_000_000, seed: int = 12345) -> float:
    """Monte Carlo E||g|| for g standard normal in R^D, via chi samples."""
    rng = np.random.default_rng(seed)
    return float(np.sqrt(rng.chisquare(D, size=n_samples)).mean())


def chi_mean(D: int) -> float:
    """Exact E||g|| = sqrt(2) Gamma((D+1)/2) / Gamma(D/2)."""
    return math.sqrt(2.0) * math.exp(math.lgamma((D + 1) / 2.0) - math.lgamma(D / 2.0))
