# cython: language_level=3
# distutils: language = c++
"""Compiled hot kernels.  Signatures mirror ``unilab._pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, ceil, log, INFINITY
from libc.stdlib cimport malloc, free
from libcpp.algorithm cimport sort

cnp.import_array()

cdef enum:
    LP_OPTIMAL = 0
    LP_INFEASIBLE = 1
    LP_UNBOUNDED = 2
    LP_MAX_ITER = 3
    LP_NUMERIC = 4
    SET_SIMPLEX = 0
    SET_BALL = 1
    SET_L1 = 2
    REFACTOR_EVERY = 100

cdef double INVPHI = 0.6180339887498949


# ---------------------------------------------------------------------------
# projections (in place on a scratch buffer)

cdef void _proj_simplex(double* v, double* out, double* work, Py_ssize_t n, double radius) noexcept nogil:
    cdef Py_ssize_t i, rho = 0
    cdef double css = 0.0, theta = 0.0, s = 0.0
    if radius <= 0.0:
        for i in range(n):
            out[i] = 0.0
        return
    # sort the negated values ascending to visit v in decreasing order
    for i in range(n):
        work[i] = -v[i]
    sort(work, work + n)
    for i in range(n):
        s -= work[i]
        if -work[i] - (s - radius) / (i + 1.0) > 0.0:
            rho = i
            css = s
    theta = (css - radius) / (rho + 1.0)
    for i in range(n):
        out[i] = v[i] - theta if v[i] > theta else 0.0


cdef void _proj_l1(double* v, double* out, double* work, double* absbuf, Py_ssize_t n, double radius) noexcept nogil:
    cdef Py_ssize_t i
    cdef double tot = 0.0
    for i in range(n):
        tot += fabs(v[i])
    if tot <= radius:
        for i in range(n):
            out[i] = v[i]
        return
    for i in range(n):
        absbuf[i] = fabs(v[i])
    _proj_simplex(absbuf, out, work, n, radius)
    for i in range(n):
        if v[i] < 0.0:
            out[i] = -out[i]
        elif v[i] == 0.0:
            out[i] = 0.0


cdef void _proj_ball(double* v, double* out, double* center, Py_ssize_t n, double radius) noexcept nogil:
    cdef Py_ssize_t i
    cdef double nrm = 0.0, d
    for i in range(n):
        d = v[i] - center[i]
        nrm += d * d
    nrm = sqrt(nrm)
    if nrm <= radius:
        for i in range(n):
            out[i] = v[i]
        return
    for i in range(n):
        out[i] = center[i] + (v[i] - center[i]) * (radius / nrm)


cdef void _project(int kind, double* v, double* out, double* center, double radius,
                   double* work, double* work2, double* work3, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i
    if kind == SET_SIMPLEX:
        _proj_simplex(v, out, work, n, radius)
    elif kind == SET_BALL:
        _proj_ball(v, out, center, n, radius)
    else:
        for i in range(n):
            work2[i] = center[i] + v[i]
        _proj_l1(work2, out, work, work3, n, radius)
        for i in range(n):
            out[i] -= center[i]


def project_simplex(v, double radius=1.0):
    cdef double[::1] vv = np.ascontiguousarray(v, dtype=np.float64)
    cdef Py_ssize_t n = vv.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    work = np.empty(n)
    cdef double[::1] w = work
    if n:
        _proj_simplex(&vv[0], &o[0], &w[0], n, radius)
    return out


def project_l1_ball(v, double radius):
    cdef double[::1] vv = np.ascontiguousarray(v, dtype=np.float64)
    cdef Py_ssize_t n = vv.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    cdef double[::1] w = np.empty(n)
    cdef double[::1] a = np.empty(n)
    if n:
        _proj_l1(&vv[0], &o[0], &w[0], &a[0], n, radius)
    return out


def project_ball(v, center, double radius):
    cdef double[::1] vv = np.ascontiguousarray(v, dtype=np.float64)
    cdef double[::1] cc = np.ascontiguousarray(center, dtype=np.float64)
    cdef Py_ssize_t n = vv.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    if n:
        _proj_ball(&vv[0], &o[0], &cc[0], n, radius)
    return out


# ---------------------------------------------------------------------------
# Monte Carlo inner problems

def simplex_excess_rows(G, double m):
    cdef double[:, ::1] g = np.ascontiguousarray(np.atleast_2d(G), dtype=np.float64)
    cdef Py_ssize_t n = g.shape[0], D = g.shape[1], i, k
    out = np.empty(n)
    cdef double[::1] o = out
    cdef double* s = <double*>malloc(D * sizeof(double))
    cdef double s1, s2, nxt, disc, kf
    try:
        with nogil:
            for i in range(n):
                for k in range(D):
                    s[k] = g[i, k]
                sort(s, s + D)
                s1 = 0.0
                s2 = 0.0
                for k in range(D):
                    s1 += s[k]
                    s2 += s[k] * s[k]
                    if k + 1 < D:
                        nxt = s[k + 1]
                        if (k + 1.0) * nxt * nxt - 2.0 * nxt * s1 + s2 >= m:
                            break
                kf = k + 1.0
                disc = s1 * s1 - kf * (s2 - m)
                if disc < 0.0:
                    disc = 0.0
                o[i] = (s1 + sqrt(disc)) / kf
    finally:
        free(s)
    return out


cdef inline double _polar_obj(double[:, ::1] g, Py_ssize_t i, double[::1] signs,
                              Py_ssize_t D, double tau) noexcept nogil:
    cdef Py_ssize_t k
    cdef double acc = 0.0, r
    for k in range(D):
        if signs[k] != 0.0:
            r = g[i, k] - tau * signs[k]
            acc += r * r
        else:
            r = fabs(g[i, k]) - tau
            if r > 0.0:
                acc += r * r
    return acc


def l1_polar_min_rows(G, signs, double tol=1e-10):
    cdef double[:, ::1] g = np.ascontiguousarray(np.atleast_2d(G), dtype=np.float64)
    cdef double[::1] sg = np.ascontiguousarray(signs, dtype=np.float64)
    cdef Py_ssize_t n = g.shape[0], D = g.shape[1], i, k
    out = np.empty(n)
    cdef double[::1] o = out
    cdef double lo, hi, c, d, fc, fd, fm, best
    with nogil:
        for i in range(n):
            lo = 0.0
            hi = 0.0
            for k in range(D):
                if fabs(g[i, k]) > hi:
                    hi = fabs(g[i, k])
            c = hi - INVPHI * (hi - lo)
            d = lo + INVPHI * (hi - lo)
            fc = _polar_obj(g, i, sg, D, c)
            fd = _polar_obj(g, i, sg, D, d)
            while hi - lo > tol:
                if fc < fd:
                    hi = d
                    d = c
                    fd = fc
                    c = hi - INVPHI * (hi - lo)
                    fc = _polar_obj(g, i, sg, D, c)
                else:
                    lo = c
                    c = d
                    fc = fd
                    d = lo + INVPHI * (hi - lo)
                    fd = _polar_obj(g, i, sg, D, d)
            fm = _polar_obj(g, i, sg, D, 0.5 * (lo + hi))
            best = fc if fc < fd else fd
            o[i] = fm if fm < best else best
    return out


# ---------------------------------------------------------------------------
# accelerated projected gradient

def pg_quadratic(M, q, t0, int kind, center, double radius, double lipschitz,
                 Py_ssize_t max_iter, double tol):
    cdef double[:, ::1] Mv = np.ascontiguousarray(M, dtype=np.float64)
    cdef double[::1] qv = np.ascontiguousarray(q, dtype=np.float64)
    cdef double[::1] cv = np.ascontiguousarray(center, dtype=np.float64)
    cdef double[::1] t0v = np.ascontiguousarray(t0, dtype=np.float64)
    cdef Py_ssize_t n = t0v.shape[0], i, j, it = 0
    xa = np.empty(n)
    cdef double[::1] x = xa
    cdef double[::1] y = np.empty(n)
    cdef double[::1] xn = np.empty(n)
    cdef double[::1] tmp = np.empty(n)
    cdef double[::1] w1 = np.empty(n)
    cdef double[::1] w2 = np.empty(n)
    cdef double[::1] w3 = np.empty(n)
    cdef double L = lipschitz, theta = 1.0, theta_n, gm = INFINITY, acc, dot, beta
    if n == 0:
        return xa, 0, 0.0
    _project(kind, &t0v[0], &x[0], &cv[0], radius, &w1[0], &w2[0], &w3[0], n)
    if L <= 0.0:
        return xa, 0, 0.0
    for i in range(n):
        y[i] = x[i]
    with nogil:
        while it < max_iter:
            it += 1
            for i in range(n):
                acc = qv[i]
                for j in range(n):
                    acc += Mv[i, j] * y[j]
                tmp[i] = y[i] - acc / L
            _project(kind, &tmp[0], &xn[0], &cv[0], radius, &w1[0], &w2[0], &w3[0], n)
            acc = 0.0
            dot = 0.0
            for i in range(n):
                acc += (xn[i] - y[i]) * (xn[i] - y[i])
                dot += (xn[i] - y[i]) * (xn[i] - x[i])
            gm = L * sqrt(acc)
            if gm <= tol:
                for i in range(n):
                    x[i] = xn[i]
                break
            theta_n = 0.5 * (1.0 + sqrt(1.0 + 4.0 * theta * theta))
            if dot > 0.0:
                theta_n = 1.0
                for i in range(n):
                    y[i] = xn[i]
            else:
                beta = (theta - 1.0) / theta_n
                for i in range(n):
                    y[i] = xn[i] + beta * (xn[i] - x[i])
            for i in range(n):
                x[i] = xn[i]
            theta = theta_n
    return xa, it, gm


# ---------------------------------------------------------------------------
# dense revised simplex

cdef int _invert(double[:, ::1] B, double[:, ::1] out, Py_ssize_t m) noexcept nogil:
    """Gauss-Jordan with partial pivoting; B is destroyed."""
    cdef Py_ssize_t i, j, k, p
    cdef double best, f, tmp
    for i in range(m):
        for j in range(m):
            out[i, j] = 1.0 if i == j else 0.0
    for k in range(m):
        p = k
        best = fabs(B[k, k])
        for i in range(k + 1, m):
            if fabs(B[i, k]) > best:
                best = fabs(B[i, k])
                p = i
        if best < 1e-14:
            return 0
        if p != k:
            for j in range(m):
                tmp = B[k, j]; B[k, j] = B[p, j]; B[p, j] = tmp
                tmp = out[k, j]; out[k, j] = out[p, j]; out[p, j] = tmp
        f = 1.0 / B[k, k]
        for j in range(m):
            B[k, j] *= f
            out[k, j] *= f
        for i in range(m):
            if i != k:
                f = B[i, k]
                if f != 0.0:
                    for j in range(m):
                        B[i, j] -= f * B[k, j]
                        out[i, j] -= f * out[k, j]
    return 1


cdef class _Simplex:
    cdef double[:, ::1] A
    cdef double[::1] b
    cdef Py_ssize_t m, n
    cdef long[::1] basis
    cdef char[::1] is_basic
    cdef double[:, ::1] Binv
    cdef double[:, ::1] Bwork
    cdef double[::1] xB, y, d, w, cost, pr
    cdef long it, degen, since, max_iter
    cdef bint bland
    cdef double tol

    def __init__(self, A, b, long max_iter, double tol):
        self.A = A
        self.b = b
        self.m = A.shape[0]
        self.n = A.shape[1]
        self.basis = np.arange(self.n, self.n + self.m, dtype=np.int64)
        ib = np.zeros(self.n + self.m, dtype=np.int8)
        ib[self.n:] = 1
        self.is_basic = ib
        self.Binv = np.eye(self.m)
        self.Bwork = np.empty((self.m, self.m))
        self.xB = np.array(b, dtype=np.float64)
        self.y = np.empty(self.m)
        self.d = np.empty(self.n)
        self.w = np.empty(self.m)
        self.pr = np.empty(self.m)
        self.cost = np.zeros(self.n + self.m)
        self.it = 0
        self.degen = 0
        self.since = 0
        self.bland = False
        self.max_iter = max_iter
        self.tol = tol

    cdef int refactor(self) noexcept nogil:
        cdef Py_ssize_t i, k, j, m = self.m
        for k in range(m):
            j = self.basis[k]
            for i in range(m):
                if j < self.n:
                    self.Bwork[i, k] = self.A[i, j]
                else:
                    self.Bwork[i, k] = 1.0 if i == j - self.n else 0.0
        if not _invert(self.Bwork, self.Binv, m):
            return 0
        for i in range(m):
            self.xB[i] = 0.0
            for k in range(m):
                self.xB[i] += self.Binv[i, k] * self.b[k]
            if self.xB[i] < 0.0:
                self.xB[i] = 0.0
        self.since = 0
        return 1

    cdef void column(self, Py_ssize_t q) noexcept nogil:
        # w = Binv a_q
        cdef Py_ssize_t i, k, m = self.m
        cdef double acc
        if q < self.n:
            for i in range(m):
                acc = 0.0
                for k in range(m):
                    acc += self.Binv[i, k] * self.A[k, q]
                self.w[i] = acc
        else:
            for i in range(m):
                self.w[i] = self.Binv[i, q - self.n]

    cdef int pivot(self, Py_ssize_t r, Py_ssize_t q) noexcept nogil:
        cdef Py_ssize_t i, j, m = self.m
        cdef double theta = self.xB[r] / self.w[r], wi
        for i in range(m):
            self.xB[i] -= theta * self.w[i]
            if self.xB[i] < 0.0:
                self.xB[i] = 0.0
        self.xB[r] = theta if theta > 0.0 else 0.0
        for j in range(m):
            self.pr[j] = self.Binv[r, j] / self.w[r]
        for i in range(m):
            if i == r:
                continue
            wi = self.w[i]
            if wi != 0.0:
                for j in range(m):
                    self.Binv[i, j] -= wi * self.pr[j]
        for j in range(m):
            self.Binv[r, j] = self.pr[j]
        self.is_basic[self.basis[r]] = 0
        self.is_basic[q] = 1
        self.basis[r] = q
        self.since += 1
        if self.since >= REFACTOR_EVERY:
            return self.refactor()
        return 1

    cdef int run(self) noexcept nogil:
        cdef Py_ssize_t i, j, k, q, r, m = self.m, n = self.n
        cdef double acc, dmin, theta, ratio, tol = self.tol
        while self.it < self.max_iter:
            for i in range(m):
                acc = 0.0
                for k in range(m):
                    acc += self.Binv[k, i] * self.cost[self.basis[k]]
                self.y[i] = acc
            q = -1
            dmin = -tol
            for j in range(n):
                if self.is_basic[j]:
                    continue
                acc = self.cost[j]
                for i in range(m):
                    acc -= self.y[i] * self.A[i, j]
                if self.bland:
                    if acc < -tol:
                        q = j
                        break
                elif acc < dmin:
                    dmin = acc
                    q = j
            if q < 0:
                return LP_OPTIMAL
            self.column(q)
            r = -1
            theta = INFINITY
            for i in range(m):
                if self.w[i] > 1e-9:
                    ratio = self.xB[i] / self.w[i]
                    if ratio < theta:
                        theta = ratio
            if theta == INFINITY:
                return LP_UNBOUNDED
            for i in range(m):
                if self.w[i] > 1e-9:
                    ratio = self.xB[i] / self.w[i]
                    if ratio <= theta + 1e-12 * (1.0 + theta):
                        if r < 0:
                            r = i
                        elif self.bland:
                            if self.basis[i] < self.basis[r]:
                                r = i
                        elif self.w[i] > self.w[r]:
                            r = i
            if theta <= tol:
                self.degen += 1
                if self.degen > 3 * (m + n):
                    self.bland = True
            self.it += 1
            if not self.pivot(r, q):
                return LP_NUMERIC
        return LP_MAX_ITER

    cdef int drive_out(self) noexcept nogil:
        cdef Py_ssize_t r, j, i, best_j, m = self.m, n = self.n
        cdef double acc, best
        for r in range(m):
            if self.basis[r] < n:
                continue
            best = 1e-7
            best_j = -1
            for j in range(n):
                if self.is_basic[j]:
                    continue
                acc = 0.0
                for i in range(m):
                    acc += self.Binv[r, i] * self.A[i, j]
                if fabs(acc) > best:
                    best = fabs(acc)
                    best_j = j
            if best_j >= 0:
                self.column(best_j)
                if not self.pivot(r, best_j):
                    return 0
        return 1


def lp_simplex(A, b, c, double tol=1e-9, long max_iter=0):
    Aw = np.array(A, dtype=np.float64, order="C", copy=True)
    bw = np.array(b, dtype=np.float64, copy=True)
    cw = np.ascontiguousarray(c, dtype=np.float64)
    cdef Py_ssize_t m = Aw.shape[0], n = Aw.shape[1], i
    if max_iter <= 0:
        max_iter = 50 * (m + n) + 100
    flip = bw < 0.0
    Aw[flip] *= -1.0
    bw[flip] *= -1.0
    cdef double feas_tol = tol * (1.0 + (np.abs(bw).max() if m else 0.0))
    cdef _Simplex s = _Simplex(Aw, bw, max_iter, tol)
    x = np.zeros(n)
    y = np.zeros(m)
    cdef int status
    for i in range(m):
        s.cost[n + i] = 1.0
    with nogil:
        status = s.run()
    basis = np.asarray(s.basis)
    xB = np.asarray(s.xB)
    phase1 = float(xB[basis >= n].sum())
    if status != LP_OPTIMAL:
        if status == LP_UNBOUNDED:
            status = LP_NUMERIC
        return status, x, y, s.it, phase1
    if phase1 > feas_tol:
        return LP_INFEASIBLE, x, y, s.it, phase1
    with nogil:
        if not s.drive_out():
            status = LP_NUMERIC
    if status != LP_OPTIMAL:
        return status, x, y, s.it, phase1
    for i in range(n):
        s.cost[i] = cw[i]
    for i in range(m):
        s.cost[n + i] = 0.0
    with nogil:
        status = s.run()
        s.refactor()
    basis = np.asarray(s.basis).copy()
    xB = np.asarray(s.xB).copy()
    mask = basis < n
    x[basis[mask]] = xB[mask]
    cost = np.asarray(s.cost)
    y = np.asarray(s.Binv).T @ cost[basis]
    y[flip] *= -1.0
    return status, x, y, s.it, phase1
