"""Diagonal operators ``L = sum_a c_a A_a^{k_a}`` acting on product bases.

On the basis element with index tuple ``idx`` the operator multiplies by its
symbol ``s(idx) = sum_a c_a lambda_a(idx_a)^{k_a}``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from itertools import product

import numpy as np

from ..bases import BasisAxis
from ..coeffs.tensor import CoefficientTensor, TensorError
from .exact import DEFAULT_BITS, MAX_BITS, Interval, Surd, parse_coefficient

# int64 is used while every partial sum stays below this bound
_INT64_SAFE = 1 << 62
# box points per vectorised chunk
CHUNK = 1 << 20


class OperatorError(ValueError):
    """Malformed operator or incompatible tensor."""


@dataclass(frozen=True)
class Factor:
    axis: BasisAxis
    coeff: Surd
    power: int = 1

    def __post_init__(self):
        if int(self.power) < 1:
            raise OperatorError("powers must be at least 1")
        object.__setattr__(self, "power", int(self.power))
        object.__setattr__(self, "coeff", parse_coefficient(self.coeff))

    def to_dict(self):
        return {"axis": self.axis.to_dict(), "coeff": self.coeff.to_json(), "power": self.power}


@dataclass(frozen=True)
class SymbolValue:
    """Symbol at an index whose value is irrational.

    ``exact`` is the surd itself; ``interval`` a rational enclosure.
    """

    exact: Surd
    interval: Interval

    @property
    def is_zero(self):
        return self.exact.is_zero()

    def __float__(self):
        return float(self.exact)


class OperatorSpec:
    """Ordered list of factors, one per tensor axis."""

    def __init__(self, factors):
        self.factors = tuple(f if isinstance(f, Factor) else Factor(*f) for f in factors)
        if not self.factors:
            raise OperatorError("an operator needs at least one factor")

    @property
    def axes(self):
        return tuple(f.axis for f in self.factors)

    @property
    def arity(self):
        return len(self.factors)

    @property
    def radicals(self):
        """Squarefree radicands present in the coefficients (1 = rational part)."""
        return sorted(set().union(*(f.coeff.terms for f in self.factors)) or {1})

    @property
    def is_rational(self):
        return all(f.coeff.is_rational for f in self.factors)

    @classmethod
    def tri(cls, c2=1, c3=1, n1=3, h=1, d=1, n=1, m=1):
        """``Laplace-Beltrami^h + c2 E^d + c3 P`` on sphere(n1) x laguerre(n) x hermite(m)."""
        return cls([
            Factor(BasisAxis.sphere(n1), Surd.rational(1), h),
            Factor(BasisAxis.laguerre(n), parse_coefficient(c2), d),
            Factor(BasisAxis.hermite(m), parse_coefficient(c3), 1),
        ])

    def check_tensor(self, c):
        if len(c.axes) != self.arity:
            raise OperatorError(f"operator arity {self.arity} does not match tensor arity {len(c.axes)}")
        for a, (ax, f) in enumerate(zip(c.axes, self.factors)):
            if ax != f.axis:
                raise OperatorError(f"axis {a}: tensor has {ax.label}, operator has {f.axis.label}")

    def to_dict(self):
        return {"factors": [f.to_dict() for f in self.factors]}

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d):
        try:
            facs = [Factor(BasisAxis.from_dict(f["axis"]), parse_coefficient(f["coeff"]),
                           int(f.get("power", 1))) for f in d["factors"]]
        except (KeyError, TypeError) as exc:
            raise OperatorError(f"malformed operator spec: {exc}") from exc
        return cls(facs)

    @classmethod
    def from_json(cls, text):
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise OperatorError(f"malformed operator JSON: {exc}") from exc

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_json(fh.read())

    def __repr__(self):
        parts = [f"({f.coeff})*{f.axis.label}^{f.power}" for f in self.factors]
        return "OperatorSpec(" + " + ".join(parts) + ")"


def _exact_symbol(L, idx):
    if len(idx) != L.arity:
        raise OperatorError(f"index {tuple(idx)} has arity {len(idx)}, operator has {L.arity}")
    total = Surd()
    for f, i in zip(L.factors, idx):
        total = total + f.coeff.scale(f.axis.eigenvalue(int(i)) ** f.power)
    return total


def symbol(L, idx, bits=DEFAULT_BITS):
    """Symbol at ``idx``: a Fraction, or a :class:`SymbolValue` when irrational."""
    s = _exact_symbol(L, idx)
    if s.is_rational:
        return s.as_fraction()
    return SymbolValue(s, s.interval(bits))


def _lcm(vals):
    return reduce(lambda a, b: a * b // math.gcd(a, b), vals, 1)


class SymbolTable:
    """Integer-scaled per-axis symbol terms over a box, grouped by radicand.

    For radicand ``D`` the symbol's ``sqrt(D)`` component at ``idx`` is
    ``sum_a terms[D][a][idx_a] / scale[D]``.
    """

    def __init__(self, L, box):
        box = tuple(int(b) for b in box)
        if len(box) != L.arity:
            raise OperatorError("box arity does not match the operator")
        self.L = L
        self.box = box
        eig = []
        for f, b in zip(L.factors, box):
            if f.axis.kind == "abstract":
                eig.append([v ** f.power for v in f.axis.eigenvalues(b)])
            else:
                eig.append([int(v) ** f.power for v in f.axis.eigenvalues_int(b)])
        self.radicals = L.radicals
        self.terms, self.scale = {}, {}
        for D in self.radicals:
            dens = []
            for f, ev in zip(L.factors, eig):
                c = f.coeff.terms.get(D, Fraction(0))
                dens.append(c.denominator)
                if c and f.axis.kind == "abstract":
                    dens.extend(Fraction(v).denominator for v in ev)
            S = _lcm(dens)
            cols = []
            for f, ev in zip(L.factors, eig):
                c = f.coeff.terms.get(D, Fraction(0))
                vals = [int(c * v * S) for v in ev] if c else [0] * len(ev)
                cols.append(vals)
            bound = sum(max(abs(v) for v in col) for col in cols)
            dtype = np.int64 if bound < _INT64_SAFE else object
            self.terms[D] = [np.array(col, dtype=dtype) for col in cols]
            self.scale[D] = S

    @property
    def size(self):
        return math.prod(b + 1 for b in self.box)

    def chunks(self):
        """Yield ``(lead, sums)`` where ``lead`` indexes the first axis.

        ``sums[D]`` has shape ``(len(lead), *box[1:]+1)``.
        """
        n0 = self.box[0] + 1
        rest = max(1, self.size // n0)
        step = max(1, CHUNK // rest)
        k = len(self.box)
        for lo in range(0, n0, step):
            lead = np.arange(lo, min(n0, lo + step))
            sums = {}
            for D, cols in self.terms.items():
                acc = cols[0][lead].reshape((-1,) + (1,) * (k - 1))
                for a in range(1, k):
                    shape = [1] * k
                    shape[a] = -1
                    acc = acc + cols[a].reshape(shape)
                sums[D] = np.broadcast_to(acc, (lead.size,) + tuple(b + 1 for b in self.box[1:]))
            yield lead, sums

    def zero_indices(self):
        """Index tuples where every radical component vanishes (exact zeros)."""
        out = []
        for lead, sums in self.chunks():
            mask = None
            for arr in sums.values():
                z = arr == 0
                mask = z if mask is None else mask & z
            for pos in zip(*np.nonzero(mask)):
                out.append((int(lead[pos[0]]),) + tuple(int(x) for x in pos[1:]))
        return out

    def float_values(self, sums):
        out = 0.0
        for D, arr in sums.items():
            out = out + arr.astype(float) * (math.sqrt(D) / self.scale[D])
        return out

    def at(self, idx):
        """Integer components of the symbol at one index."""
        return {D: sum(int(cols[a][i]) for a, i in enumerate(idx)) for D, cols in self.terms.items()}


def positive_shortcut(L):
    """True when every coefficient is positive and some factor is positive at index 0."""
    try:
        if any(f.coeff.sign() <= 0 for f in L.factors):
            return False
    except ValueError:
        return False
    if any(f.axis.kind == "abstract" and f.axis.table[0] < 0 for f in L.factors):
        return False
    return any(f.axis.eigenvalue(0) > 0 for f in L.factors)


def interval_zero_test(L, idx, bits=DEFAULT_BITS, max_bits=MAX_BITS):
    """Decide ``s(idx) = 0`` by interval refinement only.

    Returns ``True`` (certified nonzero), or ``None`` when the interval still
    contains zero at ``max_bits``.
    """
    s = _exact_symbol(L, idx)
    while bits <= max_bits:
        if not s.interval(bits).contains_zero():
            return True
        bits *= 2
    return None


def _multiply(v, s):
    if isinstance(s, Fraction):
        if isinstance(v, (Fraction, int)):
            return v * s
        return v * float(s)
    return v * float(s)


def forward_apply(L, u):
    """Coefficients of ``L u``: entrywise multiplication by the symbol."""
    L.check_tensor(u)
    out = {}
    for idx, v in u.items():
        out[idx] = _multiply(v, symbol(L, idx))
    return u.like(out)


def box_indices(box):
    return product(*(range(b + 1) for b in box))
