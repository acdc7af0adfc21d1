# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_fallback``.

Semantics match the numpy versions exactly; only the loop structure differs.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, floor, fabs, pow, sqrt, INFINITY, isinf

cnp.import_array()


def bump_sum(x, kappa, coef):
    cdef double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef long long[::1] kv = np.ascontiguousarray(kappa, dtype=np.int64)
    cdef double[::1] cv = np.ascontiguousarray(coef, dtype=np.float64)
    cdef Py_ssize_t m = xv.shape[0], d = xv.shape[1], i, j
    out = np.zeros(m)
    cdef double[::1] ov = out
    cdef double s, nu, u, val
    cdef long long flat
    for i in range(m):
        val = 1.0
        flat = 0
        for j in range(d):
            s = xv[i, j] * kv[j]
            nu = floor(s)
            u = s - nu
            if nu < 0 or nu >= kv[j] or u <= 0.0:
                val = 0.0
                break
            val *= exp(-1.0 / (u * (1.0 - u)))
            flat = flat * kv[j] + <long long>nu
        if val != 0.0:
            ov[i] = val * cv[flat]
    return out


cdef inline double _pnorm(double[::1] y, double p, double[::1] scale, Py_ssize_t n) nogil:
    cdef double acc = 0.0, a
    cdef Py_ssize_t i
    if isinf(p):
        for i in range(n):
            a = fabs(y[i] / scale[i])
            if a > acc:
                acc = a
        return acc
    if p == 1.0:
        for i in range(n):
            acc += fabs(y[i] / scale[i])
        return acc
    if p == 2.0:
        for i in range(n):
            a = y[i] / scale[i]
            acc += a * a
        return sqrt(acc)
    for i in range(n):
        acc += pow(fabs(y[i] / scale[i]), p)
    return pow(acc, 1.0 / p)


cdef inline double _ratio(double[::1] y, double[:, ::1] rho, double[::1] pexp,
                          double q, double[::1] ones, Py_ssize_t n) nogil:
    cdef double num = _pnorm(y, q, ones, n)
    cdef double den = 0.0, g
    cdef Py_ssize_t j
    for j in range(rho.shape[0]):
        g = _pnorm(y, pexp[j], rho[j], n)
        if g > den:
            den = g
    if den <= 0.0:
        return INFINITY
    return num / den


def subspace_ratios(y, rho, pexp, q):
    cdef double[:, ::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef double[:, ::1] rv = np.ascontiguousarray(np.atleast_2d(rho), dtype=np.float64)
    cdef double[::1] pv = np.ascontiguousarray(pexp, dtype=np.float64)
    cdef Py_ssize_t m = yv.shape[0], n = yv.shape[1], i
    cdef double[::1] ones = np.ones(n)
    out = np.empty(m)
    cdef double[::1] ov = out
    for i in range(m):
        ov[i] = _ratio(yv[i], rv, pv, q, ones, n)
    return out


cdef void _combine(double[::1] c, double[:, ::1] basis, double[::1] y) nogil:
    cdef Py_ssize_t a, b
    for b in range(basis.shape[1]):
        y[b] = 0.0
    for a in range(basis.shape[0]):
        for b in range(basis.shape[1]):
            y[b] += c[a] * basis[a, b]


cdef void _normalize(double[::1] c) nogil:
    cdef double s = 0.0
    cdef Py_ssize_t a
    for a in range(c.shape[0]):
        s += c[a] * c[a]
    s = sqrt(s)
    for a in range(c.shape[0]):
        c[a] /= s


def pattern_search(c, basis, rho, pexp, q, sweeps, step0, min_step):
    cdef double[:, ::1] cv = np.array(c, dtype=np.float64, order="C")
    cdef double[:, ::1] bv = np.ascontiguousarray(basis, dtype=np.float64)
    cdef double[:, ::1] rv = np.ascontiguousarray(np.atleast_2d(rho), dtype=np.float64)
    cdef double[::1] pv = np.ascontiguousarray(pexp, dtype=np.float64)
    cdef Py_ssize_t k = cv.shape[0], n = cv.shape[1], big_n = bv.shape[1]
    cdef Py_ssize_t r, s, a, sign
    cdef int nsweeps = sweeps
    cdef double step, best, tv, lo = min_step
    cdef bint improved
    cdef double[::1] ones = np.ones(big_n)
    cdef double[::1] y = np.empty(big_n)
    cdef double[::1] trial = np.empty(n)
    vals = np.empty(k)
    cdef double[::1] vv = vals
    for r in range(k):
        _normalize(cv[r])
        _combine(cv[r], bv, y)
        best = _ratio(y, rv, pv, q, ones, big_n)
        step = step0
        for s in range(nsweeps):
            if step < lo:
                break
            improved = False
            for sign in range(2):
                for a in range(n):
                    trial[:] = cv[r]
                    trial[a] += step if sign == 0 else -step
                    _normalize(trial)
                    _combine(trial, bv, y)
                    tv = _ratio(y, rv, pv, q, ones, big_n)
                    if tv < best:
                        best = tv
                        cv[r, :] = trial
                        improved = True
            if not improved:
                step *= 0.5
        vv[r] = best
    return np.asarray(cv), vals
