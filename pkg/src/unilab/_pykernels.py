"""Pure-Python (numpy) implementations of the hot kernels.

Every function here has a twin with the same signature in ``_ckernels.pyx``.
``unilab.kernels`` picks one of the two at import time.
"""
import math

import numpy as np

LP_OPTIMAL = 0
LP_INFEASIBLE = 1
LP_UNBOUNDED = 2
LP_MAX_ITER = 3
LP_NUMERIC = 4

SET_SIMPLEX = 0
SET_BALL = 1
SET_L1 = 2

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
_REFACTOR_EVERY = 100


# ---------------------------------------------------------------------------
# projections


def project_simplex(v, radius=1.0):
    """Euclidean projection onto {t >= 0, sum(t) = radius} by sort-and-threshold."""
    v = np.asarray(v, dtype=np.float64)
    if radius <= 0.0:
        return np.zeros_like(v)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - radius
    idx = np.arange(1, v.size + 1)
    cond = u - css / idx > 0
    rho = np.flatnonzero(cond)[-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def project_l1_ball(v, radius):
    v = np.asarray(v, dtype=np.float64)
    if np.abs(v).sum() <= radius:
        return v.copy()
    return np.sign(v) * project_simplex(np.abs(v), radius)


def project_ball(v, center, radius):
    v = np.asarray(v, dtype=np.float64)
    diff = v - center
    nrm = math.sqrt(float(diff @ diff))
    if nrm <= radius:
        return v.copy()
    return center + diff * (radius / nrm)


def _project(kind, v, center, radius):
    if kind == SET_SIMPLEX:
        return project_simplex(v, radius)
    if kind == SET_BALL:
        return project_ball(v, center, radius)
    if kind == SET_L1:
        return project_l1_ball(center + v, radius) - center
    raise ValueError(f"unknown set kind {kind}")


# ---------------------------------------------------------------------------
# Monte Carlo inner problems


def simplex_excess_rows(G, m):
    """Per row g, the value of min over the simplex of sqrt(m)*||t|| + g.t.

    The optimum equals the unique lam with ||(lam - g)_+|| = sqrt(m).
    """
    G = np.atleast_2d(np.asarray(G, dtype=np.float64))
    n, D = G.shape
    S = np.sort(G, axis=1)
    S1 = np.cumsum(S, axis=1)
    S2 = np.cumsum(S * S, axis=1)
    k = np.arange(1, D + 1, dtype=np.float64)
    # f(g_(k+1)) with the k smallest entries active
    nxt = S[:, 1:]
    f_next = k[:-1] * nxt * nxt - 2.0 * nxt * S1[:, :-1] + S2[:, :-1]
    reach = np.concatenate([f_next >= m, np.ones((n, 1), dtype=bool)], axis=1)
    kk = np.argmax(reach, axis=1)
    rows = np.arange(n)
    s1 = S1[rows, kk]
    s2 = S2[rows, kk]
    kf = kk + 1.0
    disc = np.maximum(s1 * s1 - kf * (s2 - m), 0.0)
    return (s1 + np.sqrt(disc)) / kf


def _l1_polar_objective(G, signs, on, tau):
    tau = tau[:, None]
    supp = np.where(on, (G - tau * signs) ** 2, 0.0).sum(axis=1)
    off = np.where(on, 0.0, np.maximum(np.abs(G) - tau, 0.0) ** 2).sum(axis=1)
    return supp + off


def l1_polar_min_rows(G, signs, tol=1e-10):
    """Per row g, min over tau >= 0 of the squared distance to tau * subdiff.

    ``signs`` has length D with +-1 on the support and 0 elsewhere.
    Golden-section search on [0, max|g_i|].
    """
    G = np.atleast_2d(np.asarray(G, dtype=np.float64))
    signs = np.asarray(signs, dtype=np.float64)
    on = signs != 0.0
    lo = np.zeros(G.shape[0])
    hi = np.abs(G).max(axis=1)
    width = float(hi.max()) if hi.size else 0.0
    steps = 0 if width <= tol else int(math.ceil(math.log(tol / width) / math.log(_INVPHI)))
    c = hi - _INVPHI * (hi - lo)
    d = lo + _INVPHI * (hi - lo)
    fc = _l1_polar_objective(G, signs, on, c)
    fd = _l1_polar_objective(G, signs, on, d)
    for _ in range(steps):
        left = fc < fd
        hi = np.where(left, d, hi)
        lo = np.where(left, lo, c)
        new_c = hi - _INVPHI * (hi - lo)
        new_d = lo + _INVPHI * (hi - lo)
        nc = np.where(left, new_c, d)
        nd = np.where(left, c, new_d)
        fnew = _l1_polar_objective(G, signs, on, np.where(left, new_c, new_d))
        fc, fd = np.where(left, fnew, fd), np.where(left, fc, fnew)
        c, d = nc, nd
    mid = _l1_polar_objective(G, signs, on, 0.5 * (lo + hi))
    return np.minimum(np.minimum(fc, fd), mid)


# ---------------------------------------------------------------------------
# accelerated projected gradient


def pg_quadratic(M, q, t0, kind, center, radius, lipschitz, max_iter, tol):
    """Minimize 0.5 t'Mt + q't over a set by projected gradient with momentum.

    Fixed step 1/lipschitz, adaptive restart.  Stops once the gradient-mapping
    norm drops to ``tol``.  Returns (t, iterations, gradient_mapping_norm).
    """
    M = np.asarray(M, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    center = np.asarray(center, dtype=np.float64)
    L = float(lipschitz)
    x = _project(kind, np.asarray(t0, dtype=np.float64), center, radius)
    if L <= 0.0:
        return x, 0, 0.0
    y = x.copy()
    theta = 1.0
    gm = math.inf
    it = 0
    while it < max_iter:
        it += 1
        grad = M @ y + q
        x_new = _project(kind, y - grad / L, center, radius)
        step = x_new - y
        gm = L * math.sqrt(float(step @ step))
        if gm <= tol:
            x = x_new
            break
        theta_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * theta * theta))
        if float(step @ (x_new - x)) > 0.0:
            # momentum points uphill: restart
            theta_new = 1.0
            y = x_new.copy()
        else:
            y = x_new + ((theta - 1.0) / theta_new) * (x_new - x)
        x = x_new
        theta = theta_new
    return x, it, gm


# ---------------------------------------------------------------------------
# dense revised simplex


def lp_simplex(A, b, c, tol=1e-9, max_iter=0):
    """Solve min c'x s.t. Ax = b, x >= 0 with a two-phase revised simplex.

    Dantzig pricing; switches to Bland's rule for good once the number of
    degenerate pivots exceeds 3*(rows + cols).  Returns
    (status, x, y, iterations, phase_one_value).
    """
    A = np.array(A, dtype=np.float64, copy=True)
    b = np.array(b, dtype=np.float64, copy=True)
    c = np.asarray(c, dtype=np.float64)
    m, n = A.shape
    if max_iter <= 0:
        max_iter = 50 * (m + n) + 100
    flip = b < 0.0
    A[flip] *= -1.0
    b[flip] *= -1.0
    piv_tol = 1e-9
    feas_tol = tol * (1.0 + (np.abs(b).max() if m else 0.0))

    basis = np.arange(n, n + m)
    is_basic = np.zeros(n + m, dtype=bool)
    is_basic[n:] = True
    Binv = np.eye(m)
    xB = b.copy()
    state = {"it": 0, "degen": 0, "bland": False, "since": 0}

    def col(j):
        if j < n:
            return A[:, j]
        e = np.zeros(m)
        e[j - n] = 1.0
        return e

    def refactor():
        B = np.column_stack([col(j) for j in basis]) if m else np.zeros((0, 0))
        try:
            inv = np.linalg.inv(B)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(inv)):
            return None
        return inv

    def pivot(r, q, w):
        nonlocal Binv, xB
        theta = xB[r] / w[r]
        xB = xB - theta * w
        xB[r] = theta
        xB[xB < 0.0] = 0.0
        pr = Binv[r] / w[r]
        Binv = Binv - np.outer(w, pr)
        Binv[r] = pr
        is_basic[basis[r]] = False
        is_basic[q] = True
        basis[r] = q
        state["since"] += 1
        if state["since"] >= _REFACTOR_EVERY:
            inv = refactor()
            if inv is None:
                return False
            Binv = inv
            xB = Binv @ b
            xB[xB < 0.0] = 0.0
            state["since"] = 0
        return True

    def run(cost):
        while state["it"] < max_iter:
            y = Binv.T @ cost[basis]
            d = cost[:n] - A.T @ y
            d[is_basic[:n]] = 0.0
            if state["bland"]:
                cand = np.flatnonzero(d < -tol)
                if cand.size == 0:
                    return LP_OPTIMAL
                q = int(cand[0])
            else:
                q = int(np.argmin(d)) if n else 0
                if n == 0 or d[q] >= -tol:
                    return LP_OPTIMAL
            w = Binv @ A[:, q]
            pos = np.flatnonzero(w > piv_tol)
            if pos.size == 0:
                return LP_UNBOUNDED
            ratios = xB[pos] / w[pos]
            theta = ratios.min()
            ties = pos[ratios <= theta + 1e-12 * (1.0 + theta)]
            if state["bland"]:
                r = int(ties[np.argmin(basis[ties])])
            else:
                r = int(ties[np.argmax(w[ties])])
            if theta <= tol:
                state["degen"] += 1
                if state["degen"] > 3 * (m + n):
                    state["bland"] = True
            state["it"] += 1
            if not pivot(r, q, w):
                return LP_NUMERIC
        return LP_MAX_ITER

    cost1 = np.concatenate([np.zeros(n), np.ones(m)])
    status = run(cost1)
    phase1 = float(xB[basis >= n].sum())
    x = np.zeros(n)
    y = np.zeros(m)
    if status != LP_OPTIMAL:
        if status == LP_UNBOUNDED:  # cannot happen in phase one
            status = LP_NUMERIC
        return status, x, y, state["it"], phase1
    if phase1 > feas_tol:
        return LP_INFEASIBLE, x, y, state["it"], phase1

    # drive zero-level artificials out of the basis where possible
    for r in range(m):
        if basis[r] < n:
            continue
        row = Binv[r] @ A
        row[is_basic[:n]] = 0.0
        j = int(np.argmax(np.abs(row))) if n else 0
        if n and abs(row[j]) > 1e-7:
            w = Binv @ A[:, j]
            if not pivot(r, j, w):
                return LP_NUMERIC, x, y, state["it"], phase1

    cost2 = np.concatenate([c, np.zeros(m)])
    status = run(cost2)
    inv = refactor()
    if inv is not None:
        Binv = inv
        xB = Binv @ b
        xB[xB < 0.0] = 0.0
    mask = basis < n
    x[basis[mask]] = xB[mask]
    y = Binv.T @ cost2[basis]
    y[flip] *= -1.0
    return status, x, y, state["it"], phase1
