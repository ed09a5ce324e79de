"""Result records shared across modules."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from unilab.models import SeedSpec

OPTIMAL = "optimal"
CONVERGED = "converged"
MAX_ITER = "max_iter"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
RANK_DEFICIENT = "rank_deficient"
FAILED = "failed"

_GOOD = frozenset({OPTIMAL, CONVERGED})


@dataclass(frozen=True)
class SolverReport:
    """Outcome of any solve: value, optimizer, iteration count, residuals, status."""

    value: float
    x: np.ndarray | None
    iterations: int = 0
    residuals: dict = field(default_factory=dict)
    status: str = OPTIMAL
    heuristic: bool = False
    degraded: bool = False

    @property
    def ok(self) -> bool:
        return self.status in _GOOD


@dataclass(frozen=True)
class FunctionalEstimate:
    """Monte Carlo estimate with its standard error (sample sd / sqrt(n))."""

    value: float
    std_error: float
    n_samples: int
    seed: "SeedSpec | None" = None

    @classmethod
    def from_samples(cls, samples, seed=None) -> "FunctionalEstimate":
        samples = np.asarray(samples, dtype=np.float64).ravel()
        n = samples.size
        mean = math.fsum(samples) / n
        if n > 1:
            var = math.fsum((samples - mean) ** 2) / (n - 1)
        else:
            var = 0.0
        return cls(mean, math.sqrt(var / n), n, seed)
