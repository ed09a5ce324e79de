"""Index sets and their geometric functionals.

The catalog is closed: sphere, subspace cap, orthant cap, probability simplex,
shifted ball, unit descent directions of the l1 norm, and the l1 sublevel set
used by the LASSO.  Monte Carlo functionals draw one Gaussian stream per
``SeedSpec`` so estimates on the same seed are paired sample by sample.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from unilab import kernels
from unilab.models import SeedSpec, box_muller
from unilab.results import CONVERGED, FunctionalEstimate, SolverReport

CHUNK = 8192
_SQRT2PI = math.sqrt(2.0 * math.pi)


class UnsupportedSetError(ValueError):
    """Raised when an operation has no implementation for a set family."""


# ---------------------------------------------------------------------------
# catalog


@dataclass(frozen=True, eq=False)
class Sphere:
    D: int

    family = "sphere"


@dataclass(frozen=True, eq=False)
class SubspaceSphere:
    """Unit sphere of the span of ``basis`` (D x k, orthonormal columns)."""

    basis: np.ndarray

    family = "subspace"

    def __post_init__(self):
        Q = np.asarray(self.basis, dtype=np.float64)
        if Q.ndim != 2 or Q.shape[1] < 1 or Q.shape[1] > Q.shape[0]:
            raise ValueError(f"basis must be D x k with 1 <= k <= D, got {Q.shape}")
        if not np.allclose(Q.T @ Q, np.eye(Q.shape[1]), atol=1e-10, rtol=0.0):
            raise ValueError("subspace basis is not orthonormal")
        object.__setattr__(self, "basis", Q)

    @property
    def D(self) -> int:
        return self.basis.shape[0]

    @property
    def k(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def coordinate(cls, k: int, D: int) -> "SubspaceSphere":
        return cls(np.eye(D)[:, :k])

    @classmethod
    def random(cls, k: int, D: int, seed: SeedSpec) -> "SubspaceSphere":
        G = box_muller(seed.child("basis").generator(), (D, k))
        Q, R = np.linalg.qr(G)
        return cls(Q * np.sign(np.diag(R)))


@dataclass(frozen=True, eq=False)
class OrthantSphere:
    D: int

    family = "orthant"


@dataclass(frozen=True, eq=False)
class Simplex:
    D: int

    family = "simplex"


@dataclass(frozen=True, eq=False)
class ShiftedBall:
    """The ball {t : ||t - scale*e1|| <= scale*alpha}.

    ``scale`` only exists to exercise homogeneity; the catalog set is scale 1.
    alpha = 1 is allowed but the ball then touches the origin.
    """

    alpha: float
    D: int
    scale: float = 1.0

    family = "ball"

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.scale <= 0.0:
            raise ValueError("scale must be positive")

    @property
    def touches_origin(self) -> bool:
        return self.alpha >= 1.0

    @property
    def center(self) -> np.ndarray:
        c = np.zeros(self.D)
        c[0] = self.scale
        return c

    @property
    def radius(self) -> float:
        return self.scale * self.alpha


@dataclass(frozen=True, eq=False)
class L1DescentCap:
    """Unit descent directions of ||.||_1 at a point with the given support and signs."""

    support: tuple
    signs: tuple
    D: int

    family = "l1cap"

    def __post_init__(self):
        support = tuple(int(i) for i in self.support)
        signs = tuple(int(s) for s in self.signs)
        if len(support) < 1:
            raise ValueError("l1 descent cap needs a nonempty support")
        if len(support) != len(signs):
            raise ValueError("support and signs differ in length")
        if len(set(support)) != len(support) or min(support) < 0 or max(support) >= self.D:
            raise ValueError("support must be distinct indices in [0, D)")
        if any(s not in (-1, 1) for s in signs):
            raise ValueError("signs must be +1 or -1")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "signs", signs)

    @classmethod
    def leading(cls, s: int, D: int) -> "L1DescentCap":
        return cls(tuple(range(s)), (1,) * s, D)

    @property
    def s(self) -> int:
        return len(self.support)

    def sign_vector(self) -> np.ndarray:
        v = np.zeros(self.D)
        v[list(self.support)] = self.signs
        return v

    def planted_point(self) -> np.ndarray:
        return self.sign_vector()


@dataclass(frozen=True, eq=False)
class L1Sublevel:
    """{u : ||anchor + u||_1 <= ||anchor||_1}."""

    anchor: np.ndarray = field(default_factory=lambda: np.zeros(1))

    family = "l1sublevel"

    def __post_init__(self):
        object.__setattr__(self, "anchor", np.asarray(self.anchor, dtype=np.float64).ravel())

    @property
    def D(self) -> int:
        return self.anchor.size

    @property
    def radius(self) -> float:
        return float(np.abs(self.anchor).sum())


SetDescriptor = Sphere | SubspaceSphere | OrthantSphere | Simplex | ShiftedBall | L1DescentCap | L1Sublevel
SPHERICAL = (Sphere, SubspaceSphere, OrthantSphere, L1DescentCap)
UNIT_BALL = SPHERICAL + (Simplex,)


def set_from_config(cfg: dict, seed: SeedSpec | None = None) -> SetDescriptor:
    """Build a set from a config table, e.g. ``{family = "orthant", D = 64}``."""
    cfg = dict(cfg)
    fam = cfg.pop("family", None)
    try:
        if fam == "sphere":
            out = Sphere(int(cfg.pop("D")))
        elif fam == "orthant":
            out = OrthantSphere(int(cfg.pop("D")))
        elif fam == "simplex":
            out = Simplex(int(cfg.pop("D")))
        elif fam == "ball":
            out = ShiftedBall(float(cfg.pop("alpha")), int(cfg.pop("D")), float(cfg.pop("scale", 1.0)))
        elif fam == "subspace":
            k, D = int(cfg.pop("k")), int(cfg.pop("D"))
            kind = cfg.pop("basis", "coordinate")
            if kind == "coordinate":
                out = SubspaceSphere.coordinate(k, D)
            elif kind == "random":
                basis_seed = cfg.pop("seed", None)
                s = SeedSpec(int(basis_seed)) if basis_seed is not None else (seed or SeedSpec(0))
                out = SubspaceSphere.random(k, D, s)
            else:
                raise ValueError(f"subspace basis must be 'coordinate' or 'random', got {kind!r}")
        elif fam == "l1cap":
            D = int(cfg.pop("D"))
            if "support" in cfg:
                support = tuple(cfg.pop("support"))
                signs = tuple(cfg.pop("signs", (1,) * len(support)))
                out = L1DescentCap(support, signs, D)
            else:
                out = L1DescentCap.leading(int(cfg.pop("s")), D)
        elif fam == "l1sublevel":
            out = L1Sublevel(np.asarray(cfg.pop("anchor"), dtype=np.float64))
        else:
            raise ValueError(f"unknown set family {fam!r}")
    except KeyError as exc:
        raise ValueError(f"set family {fam!r} is missing key {exc}") from None
    if cfg:
        raise ValueError(f"unknown keys for set {fam!r}: {sorted(cfg)}")
    return out


def parse_set(text: str, seed: SeedSpec | None = None) -> SetDescriptor:
    """Parse a descriptor like ``orthant:D=64`` or ``subspace:k=10,D=50``."""
    fam, _, rest = text.partition(":")
    cfg: dict = {"family": fam.strip()}
    for item in filter(None, (p.strip() for p in rest.split(","))):
        key, eq, val = item.partition("=")
        if not eq:
            raise ValueError(f"bad descriptor item {item!r}")
        try:
            cfg[key.strip()] = int(val)
        except ValueError:
            try:
                cfg[key.strip()] = float(val)
            except ValueError:
                cfg[key.strip()] = val.strip()
    return set_from_config(cfg, seed)


def describe(T: SetDescriptor) -> str:
    if isinstance(T, SubspaceSphere):
        return f"subspace:k={T.k},D={T.D}"
    if isinstance(T, ShiftedBall):
        return f"ball:alpha={T.alpha:g},D={T.D}" + (f",scale={T.scale:g}" if T.scale != 1.0 else "")
    if isinstance(T, L1DescentCap):
        return f"l1cap:s={T.s},D={T.D}"
    return f"{T.family}:D={T.D}"


# ---------------------------------------------------------------------------
# pointwise maps


def spherical_retraction(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    nrm = np.linalg.norm(v)
    if nrm == 0.0:
        return np.zeros_like(v)
    return v / nrm


def l1_polar_distance_sq(g, support, signs, tau: float) -> float:
    """Squared distance from g to tau times the subdifferential of ||.||_1."""
    if tau < 0.0:
        raise ValueError("tau must be nonnegative")
    g = np.asarray(g, dtype=np.float64)
    on = np.zeros(g.size, dtype=bool)
    on[list(support)] = True
    sg = np.zeros(g.size)
    sg[list(support)] = signs
    supp = np.sum((g[on] - tau * sg[on]) ** 2)
    off = np.sum(np.maximum(np.abs(g[~on]) - tau, 0.0) ** 2)
    return float(supp + off)


def _check_dim(T, G):
    if G.shape[-1] != T.D:
        raise ValueError(f"vector length {G.shape[-1]} does not match ambient dimension {T.D}")


def _support_rows(T, G) -> np.ndarray:
    _check_dim(T, G)
    if isinstance(T, Sphere):
        return np.linalg.norm(G, axis=1)
    if isinstance(T, SubspaceSphere):
        return np.linalg.norm(G @ T.basis, axis=1)
    if isinstance(T, OrthantSphere):
        return np.linalg.norm(np.maximum(G, 0.0), axis=1)
    if isinstance(T, Simplex):
        return G.max(axis=1)
    if isinstance(T, ShiftedBall):
        return T.scale * (G[:, 0] + T.alpha * np.linalg.norm(G, axis=1))
    if isinstance(T, L1DescentCap):
        # sup over the unit cap = ||projection onto the cone|| = dist to the polar cone
        return np.sqrt(np.maximum(kernels.l1_polar_min_rows(G, T.sign_vector()), 0.0))
    raise UnsupportedSetError(f"support_value is not available for {type(T).__name__}")


def support_value(T: SetDescriptor, g) -> float:
    """sup over t in T of g.t."""
    g = np.asarray(g, dtype=np.float64)
    return float(_support_rows(T, g[None, :])[0])


def project(T: SetDescriptor, v) -> np.ndarray:
    """Euclidean projection onto T (subspace caps: project then retract)."""
    v = np.asarray(v, dtype=np.float64)
    _check_dim(T, v)
    if isinstance(T, Simplex):
        return kernels.project_simplex(v, 1.0)
    if isinstance(T, ShiftedBall):
        return kernels.project_ball(v, T.center, T.radius)
    if isinstance(T, L1Sublevel):
        return kernels.project_l1_ball(T.anchor + v, T.radius) - T.anchor
    if isinstance(T, SubspaceSphere):
        return spherical_retraction(T.basis @ (T.basis.T @ v))
    raise UnsupportedSetError(f"project is not available for {type(T).__name__}")


# ---------------------------------------------------------------------------
# Monte Carlo functionals


def gaussian_chunks(seed: SeedSpec, n_samples: int, D: int):
    """Yield standard normal blocks; block i comes from its own sub-stream."""
    base = seed.child("gaussian")
    done = 0
    i = 0
    while done < n_samples:
        rows = min(CHUNK, n_samples - done)
        yield box_muller(base.child(f"chunk{i}").generator(), (rows, D))
        done += rows
        i += 1


def _estimate(per_rows, T, n_samples, seed) -> FunctionalEstimate:
    if n_samples < 100:
        raise ValueError("Monte Carlo functionals need at least 100 samples")
    vals = np.concatenate([per_rows(G) for G in gaussian_chunks(seed, n_samples, T.D)])
    return FunctionalEstimate.from_samples(vals, seed)


def sdim_samples(T, G) -> np.ndarray:
    if isinstance(T, L1DescentCap):
        return kernels.l1_polar_min_rows(G, T.sign_vector())
    return np.maximum(_support_rows(T, G), 0.0) ** 2


def statistical_dimension(T: SetDescriptor, n_samples: int, seed: SeedSpec) -> FunctionalEstimate:
    """E (sup_{t in T} g.t)_+^2 for standard normal g."""
    return _estimate(lambda G: sdim_samples(T, G), T, n_samples, seed)


def gaussian_width(T: SetDescriptor, n_samples: int, seed: SeedSpec) -> FunctionalEstimate:
    """E sup_{t in T} g.t."""
    if isinstance(T, L1Sublevel):
        raise UnsupportedSetError("gaussian_width needs a set from the compact catalog")
    return _estimate(lambda G: _support_rows(T, G), T, n_samples, seed)


def _ball_excess_rows(T: ShiftedBall, G, m: float) -> np.ndarray:
    """min over the shifted ball of sqrt(m)||t|| + g.t, one value per row.

    By rotational symmetry about e1 the problem lives in the plane spanned by
    e1 and the rest of g; the minimum sits on the boundary circle.  A grid over
    the half circle brackets it and golden-section search refines it.
    """
    sm = math.sqrt(m)
    c, r = T.scale, T.radius
    h1 = G[:, 0]
    if T.D == 1:
        a = np.array([c - r, c + r])
        vals = sm * np.abs(a)[None, :] + h1[:, None] * a[None, :]
        return vals.min(axis=1)
    h2 = -np.linalg.norm(G[:, 1:], axis=1)

    def f(theta):
        a = c + r * np.cos(theta)
        b = r * np.sin(theta)
        return sm * np.hypot(a, b) + h1 * a + h2 * b

    grid = np.linspace(0.0, math.pi, 65)
    vals = np.stack([f(np.full(G.shape[0], th)) for th in grid], axis=1)
    k = vals.argmin(axis=1)
    lo = grid[np.maximum(k - 1, 0)]
    hi = grid[np.minimum(k + 1, grid.size - 1)]
    inv = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - inv * (hi - lo)
    x2 = lo + inv * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(60):
        left = f1 < f2
        hi = np.where(left, x2, hi)
        lo = np.where(left, lo, x1)
        n1 = np.where(left, hi - inv * (hi - lo), x2)
        n2 = np.where(left, x1, lo + inv * (hi - lo))
        fn = f(np.where(left, n1, n2))
        f1, f2 = np.where(left, fn, f2), np.where(left, f1, fn)
        x1, x2 = n1, n2
    return np.minimum(np.minimum(f1, f2), vals.min(axis=1))


def excess_samples(T, G, m: float) -> np.ndarray:
    if isinstance(T, SPHERICAL):
        return math.sqrt(m) - _support_rows(T, G)
    if isinstance(T, Simplex):
        return kernels.simplex_excess_rows(G, float(m))
    if isinstance(T, ShiftedBall):
        return _ball_excess_rows(T, G, m)
    raise UnsupportedSetError(f"excess_width is not available for {type(T).__name__}")


def excess_width(T: SetDescriptor, m: float, n_samples: int, seed: SeedSpec) -> FunctionalEstimate:
    """E min_{t in T} (sqrt(m)||t|| + g.t)."""
    if m <= 0:
        raise ValueError("m must be positive")
    return _estimate(lambda G: excess_samples(T, G, m), T, n_samples, seed)


# ---------------------------------------------------------------------------
# simplex inner problem


def _simplex_objective(t, g, sm):
    return sm * math.sqrt(float(t @ t)) + float(g @ t)


def _exact_step(p, d, g, sm, gmax):
    """argmin over [0, gmax] of sm*||p + s d|| + s g.d (convex in s)."""
    a = float(d @ d)
    if a == 0.0:
        return 0.0
    b = float(p @ d)
    c = float(g @ d)
    K = max(a * float(p @ p) - b * b, 0.0)
    kappa = -c / (sm * math.sqrt(a))
    if kappa >= 1.0:
        return gmax
    if kappa <= -1.0:
        return 0.0
    u = kappa * math.sqrt(K) / math.sqrt(1.0 - kappa * kappa)
    return min(max((u - b) / a, 0.0), gmax)


def frank_wolfe_simplex(g, m: float, iterations: int = 500) -> SolverReport:
    """Away-step Frank-Wolfe with exact line search for min sqrt(m)||t|| + g.t on the simplex."""
    g = np.asarray(g, dtype=np.float64)
    D = g.size
    sm = math.sqrt(m)
    t = np.full(D, 1.0 / D)
    gap = math.inf
    for it in range(iterations):
        grad = sm * t / math.sqrt(float(t @ t)) + g
        s = int(np.argmin(grad))
        active = np.flatnonzero(t > 0.0)
        v = int(active[np.argmax(grad[active])])
        fw_gap = float(grad @ t) - grad[s]
        away_gap = grad[v] - float(grad @ t)
        gap = fw_gap
        if fw_gap <= 1e-15:
            break
        if fw_gap >= away_gap:
            d = -t.copy()
            d[s] += 1.0
            gmax = 1.0
        else:
            d = t.copy()
            d[v] -= 1.0
            gmax = t[v] / (1.0 - t[v]) if t[v] < 1.0 else 1e12
        gam = _exact_step(t, d, g, sm, gmax)
        t = np.maximum(t + gam * d, 0.0)
        t /= t.sum()
    return SolverReport(_simplex_objective(t, g, sm), t, it + 1, {"fw_gap": gap}, CONVERGED)


def simplex_inner_min(g, m: float) -> SolverReport:
    """Exact minimizer of sqrt(m)||t|| + g.t over the probability simplex.

    KKT gives t proportional to (lam - g)_+ where lam solves
    ||(lam - g)_+|| = sqrt(m); the optimal value is lam itself.
    """
    if m <= 0:
        raise ValueError("m must be positive")
    g = np.asarray(g, dtype=np.float64)
    lam = float(kernels.simplex_excess_rows(g[None, :], float(m))[0])
    w = np.maximum(lam - g, 0.0)
    tot = w.sum()
    if not (math.isfinite(lam) and tot > 0.0):
        fw = frank_wolfe_simplex(g, m)
        return SolverReport(fw.value, fw.x, fw.iterations, fw.residuals, fw.status, degraded=True)
    t = w / tot
    kkt = abs(math.sqrt(float(w @ w)) - math.sqrt(m))
    if kkt > 1e-8 * (1.0 + math.sqrt(m)):
        fw = frank_wolfe_simplex(g, m)
        return SolverReport(fw.value, fw.x, fw.iterations, fw.residuals, fw.status, degraded=True)
    return SolverReport(_simplex_objective(t, g, math.sqrt(m)), t, 1, {"kkt": kkt}, CONVERGED)


# ---------------------------------------------------------------------------
# closed-form curves


def _phi(x: float) -> float:
    return math.exp(-0.5 * x * x) / _SQRT2PI


def _gauss_tail(x: float) -> float:
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def gaussian_tail_second_moment(s: float) -> float:
    """E[(gamma - s)_+^2] for standard normal gamma."""
    return (1.0 + s * s) * _gauss_tail(s) - s * _phi(s)


def _psi_objective(tau: float, rho: float) -> float:
    return rho * (1.0 + tau * tau) + (1.0 - rho) * 2.0 * gaussian_tail_second_moment(tau)


def _psi_slope(tau: float, rho: float) -> float:
    return 2.0 * rho * tau - 4.0 * (1.0 - rho) * (_phi(tau) - tau * _gauss_tail(tau))


def psi_l1(rho: float) -> float:
    """Normalized l1 recovery threshold: m/n = psi_l1(s/n)."""
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    if rho == 0.0:
        return 0.0
    if rho == 1.0:
        return 1.0
    hi = 1.0
    while _psi_slope(hi, rho) < 0.0:
        hi *= 2.0
    if _psi_slope(0.0, rho) >= 0.0:
        return _psi_objective(0.0, rho)
    tau = brentq(_psi_slope, 0.0, hi, args=(rho,), xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return min(1.0, _psi_objective(tau, rho))


def psi_l1_inverse(y: float) -> float:
    if not 0.0 <= y <= 1.0:
        raise ValueError(f"y must lie in [0, 1], got {y}")
    if y == 0.0:
        return 0.0
    if y == 1.0:
        return 1.0
    return brentq(lambda r: psi_l1(r) - y, 0.0, 1.0, xtol=1e-14, rtol=4 * np.finfo(float).eps)


def golden_section(f, lo: float, hi: float, tol: float = 1e-10, max_iter: int = 500):
    """Minimize a unimodal scalar function on [lo, hi]; returns (x, f(x))."""
    inv = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - inv * (hi - lo)
    d = lo + inv * (hi - lo)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - inv * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + inv * (hi - lo)
            fd = f(d)
    x = 0.5 * (lo + hi)
    return x, f(x)


def simplex_excess_width_asymptotic(d: int, D: int) -> float:
    """Large-dimension limit of the d-excess width of the D-simplex (ratio D/d held fixed).

    Evaluates inf_{a >= 0} (a - inf_s (s + a sqrt(rho q(s)))) with rho = D/d and
    q(s) = E(gamma - s)_+^2 by nested golden-section searches.
    """
    if d < 1 or D < 1:
        raise ValueError("d and D must be positive")
    rho = D / d
    root = math.sqrt(rho)

    def inner(a):
        _, val = golden_section(lambda s: s + a * root * math.sqrt(gaussian_tail_second_moment(s)), -60.0, 40.0, 1e-11)
        return val

    a_lo = 1.0 / root
    _, best = golden_section(lambda a: a - inner(a), a_lo, 1e3 * a_lo, 1e-10)
    return best
