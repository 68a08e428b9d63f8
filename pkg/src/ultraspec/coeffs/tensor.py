"""Sparse coefficient tensors over products of basis axes."""

from __future__ import annotations

import json
from fractions import Fraction
from numbers import Number

import numpy as np

from ..bases import BasisAxis

# magnitudes below this are treated as structural zeros on write
ZERO_THRESHOLD = 1e-30


class TensorError(ValueError):
    """Malformed tensor or incompatible axes."""


def _is_exact(v):
    return isinstance(v, (Fraction, int)) and not isinstance(v, bool)


def _keep(v, threshold):
    if _is_exact(v):
        return v != 0
    return abs(v) >= threshold


def _fmt(v):
    if _is_exact(v):
        return str(Fraction(v))
    return repr(float(v))


def _parse(s):
    if isinstance(s, Number):
        return s
    if "/" in s or ("." not in s and "e" not in s.lower() and "n" not in s.lower()):
        return Fraction(s)
    return float(s)


class CoefficientTensor:
    """Map from index tuples to coefficients, one index per axis.

    Parameters
    ----------
    axes : sequence of BasisAxis
    truncation : sequence of int
        Largest linear index stored on each axis (inclusive).
    entries : dict, optional
        ``{(i_1, ..., i_k): value}``. Values may be Fractions, ints, floats or
        complex numbers. Entries with ``|value| < threshold`` (or exact zeros)
        are dropped.
    """

    def __init__(self, axes, truncation, entries=None, threshold=ZERO_THRESHOLD):
        self.axes = tuple(axes)
        if not self.axes:
            raise TensorError("a tensor needs at least one axis")
        if isinstance(truncation, int):
            truncation = (truncation,) * len(self.axes)
        self.truncation = tuple(int(t) for t in truncation)
        if len(self.truncation) != len(self.axes):
            raise TensorError("one truncation bound per axis is required")
        for ax, t in zip(self.axes, self.truncation):
            if t < 0:
                raise TensorError("truncation bounds must be nonnegative")
            if ax.horizon is not None and t > ax.horizon:
                raise TensorError(f"truncation {t} exceeds horizon of {ax.label}")
        self.threshold = threshold
        self._entries = {}
        for idx, v in (entries or {}).items():
            self[idx] = v

    # -- mapping interface ----------------------------------------------------
    def _check_idx(self, idx):
        idx = tuple(int(i) for i in idx)
        if len(idx) != len(self.axes):
            raise TensorError(f"index {idx} has arity {len(idx)}, expected {len(self.axes)}")
        for i, t in zip(idx, self.truncation):
            if not 0 <= i <= t:
                raise TensorError(f"index {idx} outside truncation {self.truncation}")
        return idx

    def __setitem__(self, idx, v):
        idx = self._check_idx(idx)
        if isinstance(v, complex) and v.imag == 0:
            v = v.real
        if _keep(v, self.threshold):
            self._entries[idx] = v
        else:
            self._entries.pop(idx, None)

    def __getitem__(self, idx):
        return self._entries.get(tuple(idx), 0)

    def __contains__(self, idx):
        return tuple(idx) in self._entries

    def __len__(self):
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries)

    def items(self):
        return self._entries.items()

    def keys(self):
        return self._entries.keys()

    @property
    def entries(self):
        return dict(self._entries)

    @property
    def nnz(self):
        return len(self._entries)

    @property
    def exact(self):
        return all(_is_exact(v) for v in self._entries.values())

    @property
    def is_complex(self):
        return any(isinstance(v, complex) for v in self._entries.values())

    @property
    def shape(self):
        return tuple(t + 1 for t in self.truncation)

    def __eq__(self, other):
        if not isinstance(other, CoefficientTensor):
            return NotImplemented
        return (self.axes == other.axes and self.truncation == other.truncation
                and self._entries == other._entries)

    def __repr__(self):
        labels = ", ".join(a.label for a in self.axes)
        return f"CoefficientTensor([{labels}], truncation={self.truncation}, nnz={self.nnz})"

    # -- construction helpers -------------------------------------------------
    def like(self, entries=None):
        """Empty (or filled) tensor with the same axes and truncation."""
        return CoefficientTensor(self.axes, self.truncation, entries, self.threshold)

    def map(self, fn):
        return self.like({k: fn(k, v) for k, v in self._entries.items()})

    def scale(self, s):
        return self.like({k: s * v for k, v in self._entries.items()})

    def permute(self, order):
        """Reorder the axes; ``order[k]`` is the old position of new axis ``k``."""
        order = tuple(order)
        if sorted(order) != list(range(len(self.axes))):
            raise TensorError("not a permutation of the axes")
        return CoefficientTensor(
            [self.axes[k] for k in order],
            [self.truncation[k] for k in order],
            {tuple(idx[k] for k in order): v for idx, v in self._entries.items()},
            self.threshold,
        )

    @classmethod
    def basis_element(cls, axes, truncation, idx, value=1):
        t = cls(axes, truncation)
        t[idx] = value
        return t

    @classmethod
    def from_dense(cls, axes, array, threshold=ZERO_THRESHOLD):
        array = np.asarray(array)
        t = cls(axes, [s - 1 for s in array.shape], threshold=threshold)
        for idx in zip(*np.nonzero(np.abs(array) >= threshold)):
            v = array[idx]
            t[idx] = complex(v) if np.iscomplexobj(array) else float(v)
        return t

    def to_dense(self, dtype=None):
        if dtype is None:
            dtype = complex if self.is_complex else float
        out = np.zeros(self.shape, dtype=dtype)
        for idx, v in self._entries.items():
            out[idx] = v
        return out

    def arrays(self):
        """``(idx, values)`` with ``idx`` of shape ``(nnz, k)``; values complex or float."""
        keys = list(self._entries)
        idx = np.array(keys, dtype=np.int64).reshape(len(keys), len(self.axes))
        dtype = complex if self.is_complex else float
        vals = np.array([complex(v) if dtype is complex else float(v)
                         for v in self._entries.values()], dtype=dtype)
        return idx, vals

    def norm2_squared(self):
        """Squared l2 norm; exact when all entries are exact."""
        if self.exact:
            return sum((Fraction(v) ** 2 for v in self._entries.values()), Fraction(0))
        return float(sum(abs(v) ** 2 for v in self._entries.values()))

    # -- serialisation --------------------------------------------------------
    def to_dict(self):
        entries = []
        for idx in sorted(self._entries):
            v = self._entries[idx]
            if isinstance(v, complex):
                re, im = _fmt(v.real), _fmt(v.imag)
            else:
                re, im = _fmt(v), "0"
            entries.append({"idx": list(idx), "re": re, "im": im})
        return {
            "axes": [a.to_dict() for a in self.axes],
            "truncation": list(self.truncation),
            "exact": self.exact,
            "entries": entries,
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d):
        try:
            axes = [BasisAxis.from_dict(a) for a in d["axes"]]
            t = cls(axes, d["truncation"])
            for e in d["entries"]:
                re = _parse(e.get("re", "0"))
                im = _parse(e.get("im", "0"))
                t[e["idx"]] = re if im == 0 else complex(float(re), float(im))
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise TensorError(f"malformed coefficient data: {exc}") from exc
        return t

    @classmethod
    def from_json(cls, text):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise TensorError(f"malformed coefficient JSON: {exc}") from exc
        return cls.from_dict(data)

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_json(indent=1))

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_json(fh.read())
