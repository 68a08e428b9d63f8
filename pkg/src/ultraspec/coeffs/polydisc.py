"""Generating function ``F(w) = prod_l (1 - w_l) sum_m a_m w^m`` on the unit
polydisc, its derivatives, and the inverse map back to coefficients.

Inputs are tensors whose axes are all ``laguerre(1)``, one axis per disc
coordinate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln

from ..bases import BasisAxis
from ..weights import AssociatedFunction
from .decay import TEST_FUNCTION_LIKE
from .tensor import CoefficientTensor, TensorError

# without a decay certificate, points beyond this radius are refused
UNCERTIFIED_RADIUS = 0.9


class TailNotCertified(ValueError):
    """Truncation tail cannot be bounded at the requested point."""


class PolydiscValue(NamedTuple):
    value: complex
    tail_bound: float
    certified: bool


def _check(c):
    if not all(ax.kind == "laguerre" and ax.dim == 1 for ax in c.axes):
        raise TensorError("polydisc evaluation needs laguerre(1) axes, one per disc")


def difference_coefficients(a):
    """``b_m = sum_{j <= m, j <= 1} (-1)^{|j|} a_{m-j}`` on a dense array.

    The output is one longer on every axis.
    """
    b = np.asarray(a)
    for ax in range(b.ndim):
        pad = [(0, 0)] * b.ndim
        pad[ax] = (0, 1)
        b = np.pad(b, pad)
        b = b - np.roll(b, 1, axis=ax)
    return b


def _falling(m, p):
    """``m! / (m - p)!`` (zero for ``m < p``)."""
    m = np.asarray(m)
    out = np.zeros(m.shape)
    ok = m >= p
    out[ok] = np.exp(gammaln(m[ok] + 1.0) - gammaln(m[ok] - p + 1.0))
    return out


def _axis_vectors(size, p, w):
    """Rows ``m!/(m-p)! w^(m-p)`` for every point in ``w``."""
    m = np.arange(size)
    fall = _falling(m, p)
    e = np.clip(m - p, 0, None)
    return fall[None, :] * np.power(np.asarray(w, complex)[:, None], e[None, :])


def _tail_sum(p, r, T):
    """``sum_{m > T} m!/(m-p)! r^(m-p)`` and the full sum ``p!/(1-r)^(p+1)``."""
    full = math.factorial(p) / (1.0 - r) ** (p + 1)
    m = np.arange(T + 1)
    partial = float(np.sum(_falling(m, p) * r ** np.clip(m - p, 0, None)))
    return max(full - partial, 0.0), full, partial


@dataclass
class TailCertificate:
    """Decay envelope ``|a_m| <= C prod exp(-M(h m_l))`` used to bound tails."""

    C: float
    h: float
    af: AssociatedFunction

    @classmethod
    def from_fit(cls, fit, W):
        if fit.classification != TEST_FUNCTION_LIKE:
            raise TailNotCertified("decay fit is not test-function-like")
        h = min(fit.rates)
        if math.isinf(h):
            h = 1e3
        return cls(fit.C, h, AssociatedFunction(W))


def polydisc_eval_many(c, w, p=None, certificate=None):
    """``D^p F`` at points ``w`` (shape ``(npts, n)``), with tail bounds."""
    _check(c)
    n = len(c.axes)
    w = np.atleast_2d(np.asarray(w, dtype=complex))
    if w.shape[1] != n:
        raise TensorError(f"points need {n} coordinates")
    r = np.abs(w)
    if np.any(r >= 1):
        raise TensorError("points must lie in the open unit polydisc")
    p = (0,) * n if p is None else tuple(int(x) for x in p)
    if len(p) != n or min(p) < 0:
        raise TensorError("derivative order must have one nonnegative entry per disc")
    b = difference_coefficients(c.to_dense(complex))
    vals = b
    vecs = [_axis_vectors(b.shape[a], p[a], w[:, a]) for a in range(n)]
    # contract axis by axis, keeping the point index in front
    out = np.einsum("ij,j...->i...", vecs[0], vals)
    for a in range(1, n):
        out = np.einsum("ij,ij...->i...", vecs[a], out)
    T = max(c.truncation)
    if certificate is None:
        if np.max(r) > UNCERTIFIED_RADIUS * (1 + 1e-12):
            raise TailNotCertified(
                f"tail not certified: |w| = {np.max(r):.3g} > {UNCERTIFIED_RADIUS} "
                "without a decay certificate")
        # heuristic: last stored layer times the geometric tail
        last = max(float(np.max(np.abs(np.take(b, -1, axis=ax)))) for ax in range(n))
        bound = np.array([last * _tail_product(p, rr, T) for rr in r])
        return out, bound, False
    sup_b = 2.0**n * certificate.C * math.exp(-certificate.af.evaluate(certificate.h * max(T - 1, 0)).value)
    bound = np.array([sup_b * _tail_product(p, rr, T) for rr in r])
    return out, bound, True


def _tail_product(p, rr, T):
    full, part = 1.0, 1.0
    for pl, rl in zip(p, rr):
        _, f, q = _tail_sum(pl, rl, T)
        full *= f
        part *= q
    return max(full - part, 0.0)


def polydisc_eval(c, w, p=None, certificate=None):
    """``D^p F(w)`` with an attached truncation-tail bound.

    Parameters
    ----------
    c : CoefficientTensor
        Coefficients ``a_m`` on ``laguerre(1)`` axes.
    w : sequence of complex
        Point of the open unit polydisc.
    p : sequence of int, optional
        Derivative multi-order (default zero).
    certificate : TailCertificate, optional
        Without one, points with some ``|w_l| > 0.9`` are refused.
    """
    vals, bound, cert = polydisc_eval_many(c, np.asarray(w, complex)[None, :], p, certificate)
    return PolydiscValue(complex(vals[0]), float(bound[0]), cert)


def circle_points(n, radius, npts):
    """Points with every coordinate on the circle ``|w| = radius`` (torus grid)."""
    th = 2 * np.pi * np.arange(npts) / npts
    z = radius * np.exp(1j * th)
    if n == 1:
        return z[:, None]
    grids = np.meshgrid(*([z] * n), indexing="ij")
    return np.column_stack([g.ravel() for g in grids])


@dataclass
class DerivativeBoundFit:
    """``sup_{|w| <= radius} |D^p F| <= c A^{|p|} M_{|p|}`` over ``|p| <= pmax``."""

    c: float
    A: float
    sups: dict
    radius: float

    def to_dict(self):
        return {"c": self.c, "A": self.A, "radius": self.radius,
                "sups": {",".join(map(str, k)): v for k, v in self.sups.items()}}


def _orders(n, pmax):
    if n == 1:
        return [(q,) for q in range(pmax + 1)]
    out = []
    for q in np.ndindex(*([pmax + 1] * n)):
        if sum(q) <= pmax:
            out.append(tuple(int(x) for x in q))
    return out


def fit_derivative_bounds(c, W, pmax=10, radius=0.9, npts=64, certificate=None):
    """Maximise ``|D^p F|`` on the torus ``|w_l| = radius`` and fit ``(c, A)``.

    By the maximum principle the sup over the closed polydisc of that radius
    is attained on the torus. ``c`` is anchored at ``p = 0`` and ``A`` is the
    smallest value making every order feasible.
    """
    _check(c)
    n = len(c.axes)
    if W.horizon < pmax:
        W = W.extend(pmax)
    pts = circle_points(n, radius, npts)
    sups = {}
    for q in _orders(n, pmax):
        vals, _, _ = polydisc_eval_many(c, pts, q, certificate)
        sups[q] = float(np.max(np.abs(vals)))
    s0 = sups[(0,) * n]
    if s0 == 0:
        raise TensorError("F vanishes on the sampling torus")
    log_a = 0.0
    for q, s in sups.items():
        k = sum(q)
        if k == 0 or s == 0:
            continue
        log_a = max(log_a, (math.log(s) - W.log_values[k] - math.log(s0)) / k)
    return DerivativeBoundFit(s0, math.exp(log_a), sups, radius)


def reconstruct_coefficients(F, n=1, T=32, radius=0.9, npts=256):
    """Recover ``a_m`` (``m_l <= T``) from samples of ``F`` by Cauchy integrals.

    ``b_m`` are the Taylor coefficients of ``F``; ``a`` is their cumulative sum
    along every axis. Returns a tensor on ``n`` laguerre(1) axes.
    """
    if npts < 2 * (T + 2):
        raise TensorError("npts must be at least 2*(T+2) to avoid aliasing")
    th = 2 * np.pi * np.arange(npts) / npts
    z = radius * np.exp(1j * th)
    grids = np.meshgrid(*([z] * n), indexing="ij")
    vals = np.asarray(F(*grids), dtype=complex)
    coef = np.fft.fftn(vals) / npts**n
    sl = tuple(slice(0, T + 1) for _ in range(n))
    b = coef[sl]
    scale = radius ** -np.arange(T + 1)
    for ax in range(n):
        shape = [1] * n
        shape[ax] = T + 1
        b = b * scale.reshape(shape)
    a = b
    for ax in range(n):
        a = np.cumsum(a, axis=ax)
    if np.max(np.abs(a.imag)) <= 1e-10 * max(1.0, np.max(np.abs(a.real))):
        a = a.real
    return CoefficientTensor.from_dense([BasisAxis.laguerre(1)] * n, a)
