"""Pure numpy implementations of the numerical kernels.

These are the reference versions; ``_ckernels.pyx`` mirrors them loop for
loop and the parity tests compare the two.
"""

import numpy as np

# rescale threshold for the three-term recurrences
_BIG = 1e150
_LOG_BIG = np.log(_BIG)


def assoc_max(log_m, log_t, concave=True):
    """Maximise ``p*log_t - log_m[p]`` over ``p`` for every entry of ``log_t``.

    Parameters
    ----------
    log_m : array_like
        ``log M_p`` for ``p = 0..N``.
    log_t : array_like
        Logarithms of the evaluation points. ``-inf`` encodes ``t = 0``.
    concave : bool
        If True, ``log_m`` is assumed convex so the objective is concave in
        ``p`` and the maximiser is found by binary search on the first
        differences. Otherwise a full scan is done.

    Returns
    -------
    values : ndarray
        ``max(0, max_p (p*log_t - log_m[p]))``.
    argmax : ndarray of int64
    """
    log_m = np.ascontiguousarray(log_m, dtype=np.float64)
    log_t = np.atleast_1d(np.asarray(log_t, dtype=np.float64))
    out = np.zeros(log_t.shape, dtype=np.float64)
    arg = np.zeros(log_t.shape, dtype=np.int64)
    finite = np.isfinite(log_t)
    if not finite.any():
        return out, arg
    lt = log_t[finite]
    if concave:
        d = np.diff(log_m)
        p = np.searchsorted(d, lt, side="right").astype(np.int64)
        vals = p * lt - log_m[p]
    else:
        p = np.empty(lt.shape, dtype=np.int64)
        vals = np.empty(lt.shape, dtype=np.float64)
        idx = np.arange(log_m.size, dtype=np.float64)
        step = max(1, 2_000_000 // max(1, log_m.size))
        for lo in range(0, lt.size, step):
            chunk = lt[lo:lo + step]
            table = np.outer(chunk, idx) - log_m
            p[lo:lo + step] = np.argmax(table, axis=1)
            vals[lo:lo + step] = table[np.arange(chunk.size), p[lo:lo + step]]
    neg = vals <= 0.0
    vals[neg] = 0.0
    p[neg] = 0
    out[finite] = vals
    arg[finite] = p
    return out, arg


def _combine(cur, logscale):
    with np.errstate(divide="ignore", over="ignore", under="ignore"):
        mag = np.exp(np.log(np.abs(cur)) + logscale)
    return np.sign(cur) * mag


def laguerre_table(kmax, y):
    """Rows ``k = 0..kmax`` of ``L_k(y) exp(-y/2)`` evaluated at ``y``."""
    y = np.ascontiguousarray(y, dtype=np.float64).ravel()
    out = np.empty((kmax + 1, y.size))
    prev = np.zeros_like(y)
    cur = np.ones_like(y)
    logscale = -0.5 * y
    out[0] = _combine(cur, logscale)
    for k in range(kmax):
        nxt = ((2 * k + 1 - y) * cur - k * prev) / (k + 1)
        prev, cur = cur, nxt
        big = np.abs(cur) > _BIG
        if big.any():
            cur[big] /= _BIG
            prev[big] /= _BIG
            logscale[big] += _LOG_BIG
        out[k + 1] = _combine(cur, logscale)
    return out


def hermite_table(imax, x):
    """Rows ``i = 0..imax`` of the L2-normalised Hermite functions at ``x``."""
    x = np.ascontiguousarray(x, dtype=np.float64).ravel()
    out = np.empty((imax + 1, x.size))
    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    logscale = -0.5 * x * x - 0.25 * np.log(np.pi)
    out[0] = _combine(cur, logscale)
    for n in range(imax):
        nxt = np.sqrt(2.0 / (n + 1)) * x * cur - np.sqrt(n / (n + 1.0)) * prev
        prev, cur = cur, nxt
        big = np.abs(cur) > _BIG
        if big.any():
            cur[big] /= _BIG
            prev[big] /= _BIG
            logscale[big] += _LOG_BIG
        out[n + 1] = _combine(cur, logscale)
    return out
