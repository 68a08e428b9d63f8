"""Finite-range estimate of the weighted Sobolev-type seminorm

``sup_{p <= pmax, k <= kmax} ||t^{(p+k)/2} D^p f||_2 / (A^{p+k} sqrt(M_p M_k))``

for ``f = sum a_j L_j(t) exp(-t/2)`` on the half line.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.polynomial import laguerre as nplag

from ..bases import make_quadrature
from .tensor import TensorError

# highest Laguerre degree handled by the coefficient-space recurrences
MAX_DEGREE = 150


def _derivatives(a, pmax):
    """Laguerre-series coefficients ``Q_p`` with ``D^p f = Q_p exp(-t/2)``."""
    out = [np.asarray(a, dtype=float)]
    for _ in range(pmax):
        q = out[-1]
        dq = nplag.lagder(q) if q.size > 1 else np.zeros(1)
        nxt = np.zeros(q.size)
        nxt[: dq.size] += dq
        out.append(nxt - 0.5 * q)
    return out


def g_seminorm_terms(c, pmax, kmax):
    """``||t^{(p+k)/2} D^p f||_2`` for all ``p <= pmax``, ``k <= kmax``."""
    if len(c.axes) != 1 or c.axes[0].kind != "laguerre" or c.axes[0].dim != 1:
        raise TensorError("seminorm estimation needs a single laguerre(1) axis")
    if pmax > 10 or kmax > 10 or pmax < 0 or kmax < 0:
        raise TensorError("pmax and kmax must lie in 0..10")
    deg = c.truncation[0]
    if deg > MAX_DEGREE:
        raise TensorError(f"degree {deg} exceeds the stable range ({MAX_DEGREE})")
    a = c.to_dense().real if c.is_complex else c.to_dense()
    qs = _derivatives(a, pmax)
    rule = make_quadrature("laguerre", deg + (pmax + kmax) // 2 + 2)
    t = rule.nodes[:, 0]
    logt = np.log(t)
    out = np.zeros((pmax + 1, kmax + 1))
    for p, q in enumerate(qs):
        q2 = nplag.lagval(t, q) ** 2
        for k in range(kmax + 1):
            out[p, k] = math.sqrt(float(np.sum(rule.weights * q2 * np.exp((p + k) * logt))))
    return out


def estimate_g_seminorm(c, A, W, pmax=10, kmax=10):
    """Largest normalised term over ``p <= pmax``, ``k <= kmax``."""
    if A <= 0:
        raise TensorError("A must be positive")
    if W.horizon < max(pmax, kmax):
        W = W.extend(max(pmax, kmax))
    terms = g_seminorm_terms(c, pmax, kmax)
    lm = W.log_values
    p = np.arange(pmax + 1)[:, None]
    k = np.arange(kmax + 1)[None, :]
    with np.errstate(divide="ignore"):
        logt = np.log(terms)
    scaled = logt - (p + k) * math.log(A) - 0.5 * (lm[p] + lm[k])
    return float(np.exp(np.max(scaled)))
