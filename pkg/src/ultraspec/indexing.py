"""Multi-index enumeration graded by ``|m| = sum(m)``.

Linear order: by level ``|m|`` first, then lexicographically within a level
with the last coordinate varying fastest.
"""

from __future__ import annotations

import bisect
from functools import lru_cache
from math import comb

import numpy as np


class IndexError_(ValueError):
    """Bad dimension or index."""


def level_count(n, t):
    """Number of ``e`` in ``N_0^n`` with ``|e| = t``."""
    if n < 1 or t < 0:
        raise IndexError_("need n >= 1 and t >= 0")
    return comb(t + n - 1, n - 1)


def cumulative_count(n, t):
    """Number of ``e`` in ``N_0^n`` with ``|e| <= t`` (``-1`` gives 0)."""
    if t < 0:
        return 0
    return comb(t + n, n)


class LevelTable:
    """Cumulative level counts for dimension ``n``, grown on demand."""

    def __init__(self, n):
        if n < 1:
            raise IndexError_("dimension must be at least 1")
        self.n = n
        self._cum = [1]

    def _grow(self, p):
        while self._cum[-1] <= p:
            self._cum.append(cumulative_count(self.n, len(self._cum)))

    def level_of(self, p):
        self._grow(p)
        return bisect.bisect_right(self._cum, p)

    def start(self, t):
        return cumulative_count(self.n, t - 1)

    def counts(self, tmax):
        return [cumulative_count(self.n, t) for t in range(tmax + 1)]


@lru_cache(maxsize=16)
def _table(n):
    return LevelTable(n)


def _unrank_level(n, t, r):
    """The ``r``-th composition of ``t`` into ``n`` parts, lexicographic."""
    out = []
    for k in range(n - 1, 0, -1):
        # first coordinate c: skip blocks of compositions of t - c into k parts
        c = 0
        while True:
            block = comb(t - c + k - 1, k - 1)
            if r < block:
                break
            r -= block
            c += 1
        out.append(c)
        t -= c
    out.append(t)
    return tuple(out)


def _rank_level(m):
    n = len(m)
    t = sum(m)
    r = 0
    for pos in range(n - 1):
        k = n - 1 - pos
        for c in range(m[pos]):
            r += comb(t - c + k - 1, k - 1)
        t -= m[pos]
    return r


def linear_to_multi(n, p):
    """Multi-index at linear position ``p`` in dimension ``n``."""
    if n < 1:
        raise IndexError_("dimension must be at least 1")
    if p < 0:
        raise IndexError_("linear index must be nonnegative")
    if n == 1:
        return (int(p),)
    t = _table(n).level_of(p)
    return _unrank_level(n, t, p - cumulative_count(n, t - 1))


def multi_to_linear(n, m):
    """Inverse of :func:`linear_to_multi`."""
    m = tuple(int(x) for x in m)
    if len(m) != n:
        raise IndexError_(f"multi-index {m} has dimension {len(m)}, expected {n}")
    if any(x < 0 for x in m):
        raise IndexError_("multi-index coordinates must be nonnegative")
    t = sum(m)
    return cumulative_count(n, t - 1) + _rank_level(m)


def laguerre_nu(n, p):
    """Level ``|m|`` of the multi-index at linear position ``p``."""
    if p < 0:
        raise IndexError_("linear index must be nonnegative")
    if n == 1:
        return int(p)
    return _table(n).level_of(p)


def laguerre_nu_array(n, pmax):
    """``[laguerre_nu(n, p) for p in range(pmax + 1)]`` as an int64 array."""
    if n == 1:
        return np.arange(pmax + 1, dtype=np.int64)
    t = laguerre_nu(n, pmax)
    counts = [level_count(n, s) for s in range(t + 1)]
    return np.repeat(np.arange(t + 1, dtype=np.int64), counts)[: pmax + 1]


def enumerate_level(n, t):
    """All compositions of ``t`` into ``n`` parts in linear order."""
    return [_unrank_level(n, t, r) for r in range(level_count(n, t))] if n > 1 else [(t,)]
