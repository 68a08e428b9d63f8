"""Exact quadratic-surd numbers and certified rational intervals.

A :class:`Surd` is a finite sum ``sum_D c_D sqrt(D)`` with rational ``c_D``
and distinct squarefree ``D >= 1``. Such a sum is zero only when every
``c_D`` is zero (square roots of distinct squarefree integers are linearly
independent over the rationals), so structural zero tests are exact.
Magnitudes and signs come from rational enclosures of ``sqrt(D)`` obtained
with integer square roots.
"""

from __future__ import annotations

import math
import os
import re
from fractions import Fraction

DEFAULT_BITS = int(os.environ.get("ULTRASPEC_PRECISION", "64"))
MAX_BITS = 4096


class ExactError(ValueError):
    """Unparseable coefficient or uncertifiable comparison."""


def squarefree_split(n):
    """``n = k^2 * d`` with ``d`` squarefree; returns ``(k, d)``."""
    if n <= 0:
        raise ExactError("radicand must be positive")
    k, d = 1, n
    f = 2
    while f * f <= d:
        while d % (f * f) == 0:
            d //= f * f
            k *= f
        f += 1
    return k, d


def sqrt_interval(D, bits):
    """Rational ``[lo, hi]`` containing ``sqrt(D)`` with width ``<= 2^-bits``."""
    scale = 1 << bits
    r = math.isqrt(D * scale * scale)
    lo = Fraction(r, scale)
    hi = lo if r * r == D * scale * scale else Fraction(r + 1, scale)
    return lo, hi


class Interval:
    """Closed interval with Fraction endpoints."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None):
        self.lo = Fraction(lo)
        self.hi = Fraction(lo if hi is None else hi)
        if self.hi < self.lo:
            raise ExactError("empty interval")

    def __add__(self, other):
        if not isinstance(other, Interval):
            other = Interval(other)
        return Interval(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def scale(self, q):
        q = Fraction(q)
        a, b = self.lo * q, self.hi * q
        return Interval(min(a, b), max(a, b))

    @property
    def width(self):
        return self.hi - self.lo

    @property
    def mid(self):
        return (self.lo + self.hi) / 2

    def contains_zero(self):
        return self.lo <= 0 <= self.hi

    def abs_lower(self):
        """Lower bound of ``|x|`` over the interval."""
        if self.contains_zero():
            return Fraction(0)
        return min(abs(self.lo), abs(self.hi))

    def __float__(self):
        return float(self.mid)

    def __repr__(self):
        return f"Interval({float(self.lo)!r}, {float(self.hi)!r})"


class Surd:
    """``sum_D c_D sqrt(D)`` with exact rational coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        for D, c in (terms or {}).items():
            c = Fraction(c)
            if c:
                k, d = squarefree_split(int(D))
                clean[d] = clean.get(d, Fraction(0)) + c * k
        self.terms = {d: c for d, c in clean.items() if c}

    @classmethod
    def rational(cls, q):
        return cls({1: q})

    @classmethod
    def sqrt(cls, D, scale=1):
        return cls({D: scale})

    @property
    def is_rational(self):
        return set(self.terms) <= {1}

    def as_fraction(self):
        if not self.is_rational:
            raise ExactError("irrational value has no Fraction form")
        return self.terms.get(1, Fraction(0))

    def is_zero(self):
        return not self.terms

    def __add__(self, other):
        if not isinstance(other, Surd):
            other = Surd.rational(other)
        out = dict(self.terms)
        for d, c in other.terms.items():
            out[d] = out.get(d, Fraction(0)) + c
        return Surd(out)

    __radd__ = __add__

    def __neg__(self):
        return Surd({d: -c for d, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, Surd) else Surd.rational(-Fraction(other)))

    def scale(self, q):
        q = Fraction(q)
        return Surd({d: c * q for d, c in self.terms.items()})

    def __mul__(self, q):
        if isinstance(q, Surd):
            out = Surd()
            for d1, c1 in self.terms.items():
                for d2, c2 in q.terms.items():
                    out = out + Surd({d1 * d2: c1 * c2})
            return out
        return self.scale(q)

    __rmul__ = __mul__

    def __pow__(self, k):
        out = Surd.rational(1)
        for _ in range(int(k)):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, Surd):
            other = Surd.rational(other)
        return self.terms == other.terms

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items())))

    def interval(self, bits=DEFAULT_BITS):
        acc = Interval(0)
        for d, c in self.terms.items():
            if d == 1:
                acc = acc + Interval(c)
            else:
                lo, hi = sqrt_interval(d, bits)
                acc = acc + Interval(lo, hi).scale(c)
        return acc

    def sign(self, bits=DEFAULT_BITS, max_bits=MAX_BITS):
        """Certified sign; raises if not separable from zero by ``max_bits``."""
        if self.is_zero():
            return 0
        while bits <= max_bits:
            iv = self.interval(bits)
            if iv.lo > 0:
                return 1
            if iv.hi < 0:
                return -1
            bits *= 2
        raise ExactError("sign not certified at the maximum precision")

    def __float__(self):
        return float(sum(float(c) * math.sqrt(d) for d, c in self.terms.items()))

    def __repr__(self):
        return " + ".join(f"{c}*sqrt({d})" if d != 1 else str(c)
                          for d, c in sorted(self.terms.items())) or "0"

    def to_json(self):
        if self.is_rational:
            return str(self.as_fraction())
        return {"algebraic": " + ".join(
            (f"{c}*sqrt{d}" if d != 1 else str(c)) for d, c in sorted(self.terms.items()))}


_TERM = re.compile(
    r"^\s*([+-]?)\s*(?:(\d+(?:/\d+)?(?:\.\d+)?)\s*\*?\s*)?sqrt\s*\(?\s*(\d+)\s*\)?\s*$")


def parse_coefficient(value):
    """Parse ``'3/4'``, ``0.5``, ``'sqrt2'``, ``'-1/2*sqrt(3)'`` or ``{'algebraic': ...}``.

    Decimal inputs are read as the exact rational they denote.
    """
    if isinstance(value, Surd):
        return value
    if isinstance(value, dict):
        if "algebraic" not in value:
            raise ExactError(f"unknown coefficient object {value!r}")
        value = value["algebraic"]
    if isinstance(value, (int, Fraction)):
        return Surd.rational(value)
    if isinstance(value, float):
        return Surd.rational(Fraction(repr(value)))
    text = str(value).strip()
    if "sqrt" not in text:
        try:
            return Surd.rational(Fraction(text))
        except (ValueError, ZeroDivisionError) as exc:
            raise ExactError(f"cannot parse coefficient {value!r}") from exc
    out = Surd()
    for part in re.split(r"(?<=[^\s*/(])\s*(?=[+-])", text):
        if not part.strip():
            continue
        m = _TERM.match(part)
        if m:
            sign = -1 if m.group(1) == "-" else 1
            scale = Fraction(m.group(2)) if m.group(2) else Fraction(1)
            out = out + Surd.sqrt(int(m.group(3)), sign * scale)
            continue
        try:
            out = out + Surd.rational(Fraction(part.replace(" ", "")))
        except (ValueError, ZeroDivisionError) as exc:
            raise ExactError(f"cannot parse coefficient {value!r}") from exc
    return out
