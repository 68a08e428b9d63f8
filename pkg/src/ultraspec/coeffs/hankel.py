"""Coefficient-level Hankel-Clifford transform of order zero.

On a ``laguerre(n)`` axis the transform acts diagonally: the coefficient at
multi-index ``m`` picks up ``(-1)^(sum of m_l over the chosen coordinates)``.
"""

from __future__ import annotations

from ..indexing import linear_to_multi
from .tensor import TensorError


def hankel_clifford(c, coords, axis=None):
    """Apply the sign flip for the coordinate subset ``coords`` (1-based).

    Parameters
    ----------
    c : CoefficientTensor
    coords : iterable of int
        Subset of ``{1, ..., n}`` of the laguerre axis.
    axis : int, optional
        Position of the laguerre axis; defaults to the only one present.
    """
    if axis is None:
        found = [a for a, ax in enumerate(c.axes) if ax.kind == "laguerre"]
        if len(found) != 1:
            raise TensorError("specify which laguerre axis to transform")
        axis = found[0]
    ax = c.axes[axis]
    if ax.kind != "laguerre":
        raise TensorError(f"axis {axis} is {ax.label}, not laguerre")
    coords = sorted(set(int(l) for l in coords))
    if any(not 1 <= l <= ax.dim for l in coords):
        raise TensorError(f"coordinate subset {coords} outside 1..{ax.dim}")
    if not coords:
        return c.like(c.entries)
    parity = {}
    out = {}
    for idx, v in c.items():
        p = idx[axis]
        s = parity.get(p)
        if s is None:
            m = linear_to_multi(ax.dim, p)
            s = parity[p] = sum(m[l - 1] for l in coords) % 2
        out[idx] = -v if s else v
    return c.like(out)
