"""Random-matrix ensembles with reproducible per-trial streams.

Every ensemble is standardized (mean 0, variance 1) and symmetric.  Streams are
derived by hashing ``(master_seed, trial_index, stream_label)`` into a Philox
key, so a trial's matrix never depends on which worker ran it or in what order.
"""
from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass

import numpy as np

from unilab.results import FunctionalEstimate

KINDS = ("gaussian", "rademacher", "sparse_rademacher", "student_t", "sparsified")


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int
    trial_index: int = 0
    stream_label: str = ""

    def key(self) -> int:
        msg = f"{int(self.master_seed)}\x1f{int(self.trial_index)}\x1f{self.stream_label}".encode()
        return int.from_bytes(hashlib.blake2b(msg, digest_size=16).digest(), "little")

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(key=self.key()))

    def child(self, label: str) -> "SeedSpec":
        sub = f"{self.stream_label}/{label}" if self.stream_label else label
        return SeedSpec(self.master_seed, self.trial_index, sub)

    def trial(self, index: int) -> "SeedSpec":
        return SeedSpec(self.master_seed, index, self.stream_label)


def box_muller(rng: np.random.Generator, size) -> np.ndarray:
    """Standard normals from exactly 2*ceil(n/2) uniforms."""
    shape = (size,) if np.isscalar(size) else tuple(size)
    n = int(np.prod(shape))
    k = (n + 1) // 2
    u1 = 1.0 - rng.random(k)  # (0, 1]
    u2 = rng.random(k)
    r = np.sqrt(-2.0 * np.log(u1))
    z = np.concatenate([r * np.cos(2.0 * np.pi * u2), r * np.sin(2.0 * np.pi * u2)])
    return z[:n].reshape(shape)


def _gaussian_abs_moment(p: float) -> float:
    return 2.0 ** (p / 2.0) * math.exp(math.lgamma((p + 1.0) / 2.0)) / math.sqrt(math.pi)


def _student_abs_moment(p: float, dof: float) -> float:
    """E|T|^p for T standardized Student-t with ``dof`` degrees of freedom (p < dof)."""
    raw = dof ** (p / 2.0) * math.exp(
        math.lgamma((p + 1.0) / 2.0) + math.lgamma((dof - p) / 2.0) - math.lgamma(dof / 2.0)
    ) / math.sqrt(math.pi)
    return raw * ((dof - 2.0) / dof) ** (p / 2.0)


@dataclass(frozen=True)
class MatrixModel:
    """Entry law of a random matrix.

    ``param`` is the thinning level for ``sparse_rademacher`` / ``sparsified``
    and the degrees of freedom for ``student_t``.  ``declared_p`` and
    ``declared_nu`` record the moment bound E|X|^p <= nu^p the law satisfies.
    """

    kind: str
    param: float | None = None
    base: "MatrixModel | None" = None
    declared_p: float | None = None
    declared_nu: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ModelError(f"unknown model kind {self.kind!r}")
        if self.kind in ("sparse_rademacher", "sparsified"):
            if self.param is None or not 0.0 < self.param <= 1.0:
                raise ModelError(f"{self.kind} needs thinning level in (0, 1], got {self.param}")
        if self.kind == "sparsified" and self.base is None:
            raise ModelError("sparsified needs a base model")
        if self.kind == "student_t" and (self.param is None or self.param <= 4.0):
            raise ModelError(f"student_t needs more than 4 degrees of freedom, got {self.param}")
        p = self.declared_p if self.declared_p is not None else self._default_p()
        if p <= 4.0:
            raise ModelError(f"moment order must exceed 4, got {p}")
        if self.kind == "student_t" and p >= self.param:
            raise ModelError(f"student_t({self.param}) has no moment of order {p}")
        nu = self.declared_nu if self.declared_nu is not None else self._moment_bound(p)
        if nu < 1.0:
            raise ModelError(f"moment bound must be >= 1, got {nu}")
        object.__setattr__(self, "declared_p", float(p))
        object.__setattr__(self, "declared_nu", float(nu))

    def _default_p(self) -> float:
        if self.kind == "student_t":
            return min(5.0, 0.5 * (4.0 + self.param))
        if self.kind == "sparsified":
            return self.base.declared_p
        return 5.0

    def _moment_bound(self, p: float) -> float:
        if self.kind == "gaussian":
            nu = _gaussian_abs_moment(p) ** (1.0 / p)
        elif self.kind == "rademacher":
            nu = 1.0
        elif self.kind == "sparse_rademacher":
            nu = self.param ** (1.0 / p - 0.5)
        elif self.kind == "student_t":
            nu = _student_abs_moment(p, self.param) ** (1.0 / p)
        else:
            base_nu = self.base._moment_bound(p)
            nu = self.param ** (1.0 / p - 0.5) * base_nu
        return max(1.0, nu)

    @property
    def name(self) -> str:
        if self.kind in ("gaussian", "rademacher"):
            return self.kind
        if self.kind == "sparsified":
            return f"sparsified({self.base.name},{self.param:g})"
        return f"{self.kind}({self.param:g})"

    def entries(self, rng: np.random.Generator, shape) -> np.ndarray:
        if self.kind == "gaussian":
            return box_muller(rng, shape)
        if self.kind == "rademacher":
            return np.where(rng.random(shape) < 0.5, -1.0, 1.0)
        if self.kind == "sparse_rademacher":
            a = self.param
            u = rng.random(shape)
            mag = a ** -0.5
            return np.where(u < 0.5 * a, -mag, np.where(u < a, mag, 0.0))
        if self.kind == "student_t":
            dof = self.param
            z = box_muller(rng, shape)
            chi2 = rng.chisquare(dof, size=shape)
            return z / np.sqrt(chi2 / dof) * math.sqrt((dof - 2.0) / dof)
        vals = self.base.entries(rng, shape)
        keep = rng.random(shape) < self.param
        return np.where(keep, vals / math.sqrt(self.param), 0.0)


def gaussian() -> MatrixModel:
    return MatrixModel("gaussian")


def rademacher() -> MatrixModel:
    return MatrixModel("rademacher")


def sparse_rademacher(alpha: float) -> MatrixModel:
    return MatrixModel("sparse_rademacher", float(alpha))


def student_t(dof: float) -> MatrixModel:
    return MatrixModel("student_t", float(dof))


def sparsified(base: MatrixModel, alpha: float) -> MatrixModel:
    return MatrixModel("sparsified", float(alpha), base)


_MODEL_RE = re.compile(r"^\s*([a-z_]+)\s*(?:\((.*)\))?\s*$")


def parse_model(text: str) -> MatrixModel:
    """Parse names like ``gaussian``, ``student_t(5)``, ``sparsified(student_t(6),0.3)``."""
    m = _MODEL_RE.match(text)
    if not m:
        raise ModelError(f"cannot parse model {text!r}")
    kind, args = m.group(1), m.group(2)
    if kind in ("gaussian", "rademacher"):
        if args:
            raise ModelError(f"{kind} takes no parameters")
        return MatrixModel(kind)
    if args is None:
        raise ModelError(f"{kind} needs a parameter")
    if kind == "sparsified":
        base_text, _, alpha = args.rpartition(",")
        return sparsified(parse_model(base_text), float(alpha))
    return MatrixModel(kind, float(args))


def model_from_config(cfg: dict) -> MatrixModel:
    """Build a model from a config table, e.g. ``{kind = "student_t", dof = 5}``."""
    cfg = dict(cfg)
    kind = cfg.pop("kind", None)
    if kind is None:
        raise ModelError("model table needs a 'kind' key")
    p = cfg.pop("p", None)
    nu = cfg.pop("nu", None)
    param = None
    base = None
    if kind in ("sparse_rademacher", "sparsified"):
        param = cfg.pop("alpha", None)
    elif kind == "student_t":
        param = cfg.pop("dof", None)
    if kind == "sparsified":
        b = cfg.pop("base", None)
        if b is None:
            raise ModelError("sparsified model needs a 'base' table")
        base = model_from_config(b) if isinstance(b, dict) else parse_model(b)
    if cfg:
        raise ModelError(f"unknown keys for model {kind!r}: {sorted(cfg)}")
    return MatrixModel(kind, None if param is None else float(param), base, p, nu)


def sample_matrix(model: MatrixModel, d: int, D: int, seed: SeedSpec) -> np.ndarray:
    """d x D matrix of independent entries drawn from ``model``."""
    if d < 1 or D < 1:
        raise ModelError(f"matrix dimensions must be positive, got {d} x {D}")
    return model.entries(seed.generator(), (d, D))


def entry_moment_check(model: MatrixModel, order: int, n_samples: int, seed: SeedSpec) -> FunctionalEstimate:
    """Monte Carlo estimate of E|X|^order for one entry."""
    if order not in (1, 2, 3, 4):
        raise ModelError(f"order must be 1..4, got {order}")
    x = model.entries(seed.generator(), (n_samples,))
    return FunctionalEstimate.from_samples(np.abs(x) ** order, seed)
