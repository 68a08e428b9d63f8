"""Expansion by tensor quadrature and truncated synthesis."""

from __future__ import annotations

import numpy as np

from ..bases import BasisError
from .tensor import ZERO_THRESHOLD, CoefficientTensor

# extra quadrature order beyond the largest degree on an axis
QUAD_GUARD = 5


def _coords(axis, nodes):
    return [nodes[:, c] for c in range(nodes.shape[1])]


def expand(f, axes, truncation, order=None, threshold=ZERO_THRESHOLD):
    """Coefficients of ``f`` against the product basis, by tensor quadrature.

    ``f`` is called once on the full quadrature grid as
    ``f(*coords)``: sphere axes contribute ``(theta, phi)``, ``laguerre(n)``
    contributes ``y_1..y_n`` and ``hermite(m)`` contributes ``x_1..x_m``.
    Each coordinate array has the grid shape ``(N_1, ..., N_k)``.

    Parameters
    ----------
    order : int or sequence of int, optional
        Per-axis quadrature order. Defaults to the largest one-dimensional
        degree plus ``QUAD_GUARD``.
    """
    axes = list(axes)
    if isinstance(truncation, int):
        truncation = [truncation] * len(axes)
    for ax in axes:
        if not ax.numerical:
            raise BasisError(f"expansion requires numerical axes; {ax.label} is abstract")
    if order is None or isinstance(order, int):
        order = [order] * len(axes)
    rules, tables = [], []
    for ax, t, q in zip(axes, truncation, order):
        q = q or ax.max_degree(t) + QUAD_GUARD
        if q < ax.max_degree(t) + 1:
            raise BasisError("quadrature order below the truncation degree")
        nodes, w = ax.quadrature(q)
        rules.append((nodes, w))
        tables.append(ax.basis_table(t, nodes) * w)
    k = len(axes)
    sizes = [r[0].shape[0] for r in rules]
    coords = []
    for a, (nodes, _) in enumerate(rules):
        shape = [1] * k
        shape[a] = sizes[a]
        for c in _coords(axes[a], nodes):
            coords.append(np.broadcast_to(c.reshape(shape), sizes))
    vals = np.asarray(f(*coords))
    vals = np.broadcast_to(vals, sizes)
    # contract grid axis a against table a; the result axis moves to the end
    out = vals
    for tab in tables:
        out = np.tensordot(out, tab, axes=([0], [1]))
    return CoefficientTensor.from_dense(axes, out, threshold=threshold)


def _point_tables(c, points):
    if len(points) != len(c.axes):
        raise BasisError("one point array per axis is required")
    tabs = []
    npts = None
    for ax, t, pts in zip(c.axes, c.truncation, points):
        if not ax.numerical:
            raise BasisError(f"synthesis requires numerical axes; {ax.label} is abstract")
        pts = np.asarray(pts, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None] if ax.point_dim == 1 else pts[None, :]
        if npts is None:
            npts = pts.shape[0]
        elif pts.shape[0] != npts:
            raise BasisError("all axes need the same number of points")
        tabs.append(ax.basis_table(t, pts))
    return tabs, npts


def synthesize(c, points):
    """Evaluate ``sum c_idx prod_a phi_{idx_a}(x_a)`` at paired points.

    Parameters
    ----------
    c : CoefficientTensor
    points : sequence of arrays
        ``points[a]`` has shape ``(npts, point_dim_a)``; the ``i``-th point of
        every axis together form one evaluation point.
    """
    tabs, npts = _point_tables(c, points)
    if c.nnz == 0:
        return np.zeros(npts)
    idx, vals = c.arrays()
    prod = tabs[0][idx[:, 0]]
    for a in range(1, len(tabs)):
        prod = prod * tabs[a][idx[:, a]]
    return vals @ prod
