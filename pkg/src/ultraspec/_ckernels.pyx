# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, fabs, sqrt, isfinite, M_PI

cnp.import_array()

cdef double _BIG = 1e150
cdef double _LOG_BIG = log(1e150)


cdef inline double _combine(double cur, double logscale) nogil:
    if cur == 0.0:
        return 0.0
    if cur > 0.0:
        return exp(log(cur) + logscale)
    return -exp(log(-cur) + logscale)


def assoc_max(log_m, log_t, bint concave=True):
    cdef const double[::1] lm = np.ascontiguousarray(log_m, dtype=np.float64)
    lt_arr = np.ascontiguousarray(np.atleast_1d(np.asarray(log_t, dtype=np.float64)))
    shape = lt_arr.shape
    cdef const double[::1] lt = lt_arr.ravel()
    cdef Py_ssize_t n = lt.shape[0]
    cdef Py_ssize_t horizon = lm.shape[0] - 1
    out_arr = np.zeros(n, dtype=np.float64)
    arg_arr = np.zeros(n, dtype=np.int64)
    cdef double[::1] out = out_arr
    cdef cnp.int64_t[::1] arg = arg_arr
    cdef Py_ssize_t i, p, lo, hi, mid, best
    cdef double x, v, bestv
    with nogil:
        for i in range(n):
            x = lt[i]
            if not isfinite(x):
                continue
            if concave:
                # largest p with lm[p] - lm[p-1] <= x
                lo = 0
                hi = horizon
                while lo < hi:
                    mid = (lo + hi + 1) // 2
                    if lm[mid] - lm[mid - 1] <= x:
                        lo = mid
                    else:
                        hi = mid - 1
                best = lo
                bestv = best * x - lm[best]
            else:
                best = 0
                bestv = -lm[0]
                for p in range(1, horizon + 1):
                    v = p * x - lm[p]
                    if v > bestv:
                        bestv = v
                        best = p
            if bestv <= 0.0:
                out[i] = 0.0
                arg[i] = 0
            else:
                out[i] = bestv
                arg[i] = best
    return out_arr.reshape(shape), arg_arr.reshape(shape)


cdef inline double _apply(double cur, double logscale, double scale) nogil:
    # cached exp(logscale) when it is a normal double; log-space otherwise
    if scale > 1e-290:
        return cur * scale
    return _combine(cur, logscale)


cdef void _recur(double[:, ::1] out, double[::1] prev, double[::1] cur,
                 double[::1] logscale, double[::1] scale, const double[::1] a, int kmax, bint laguerre) noexcept nogil:
    cdef Py_ssize_t n = cur.shape[0]
    cdef Py_ssize_t i
    cdef int k
    cdef double nxt, c1, c2
    for i in range(n):
        scale[i] = exp(logscale[i])
        out[0, i] = _apply(cur[i], logscale[i], scale[i])
    for k in range(kmax):
        if laguerre:
            c1 = 1.0 / (k + 1)
            c2 = k / (k + 1.0)
        else:
            c1 = sqrt(2.0 / (k + 1))
            c2 = sqrt(k / (k + 1.0))
        for i in range(n):
            if laguerre:
                nxt = (2 * k + 1 - a[i]) * c1 * cur[i] - c2 * prev[i]
            else:
                nxt = c1 * a[i] * cur[i] - c2 * prev[i]
            prev[i] = cur[i]
            cur[i] = nxt
            if fabs(nxt) > _BIG:
                cur[i] /= _BIG
                prev[i] /= _BIG
                logscale[i] += _LOG_BIG
                scale[i] = exp(logscale[i])
            out[k + 1, i] = _apply(cur[i], logscale[i], scale[i])


def _table(int kmax, pts, bint laguerre):
    cdef const double[::1] a = np.ascontiguousarray(pts, dtype=np.float64).ravel()
    cdef Py_ssize_t n = a.shape[0]
    out_arr = np.empty((kmax + 1, n), dtype=np.float64)
    prev = np.zeros(n)
    cur = np.ones(n)
    x = np.asarray(a)
    if laguerre:
        logscale = -0.5 * x
    else:
        logscale = -0.5 * x * x - 0.25 * log(M_PI)
    logscale = np.ascontiguousarray(logscale, dtype=np.float64)
    scale = np.empty(n)
    cdef double[:, ::1] o = out_arr
    cdef double[::1] pv = prev, cv = cur, lv = logscale, sv = scale
    with nogil:
        _recur(o, pv, cv, lv, sv, a, kmax, laguerre)
    return out_arr


def laguerre_table(int kmax, y):
    return _table(kmax, y, True)


def hermite_table(int imax, x):
    return _table(imax, x, False)
