"""Small-divisor scans for the pair ``(c2 E^d, c3 P)``.

For each ``(p, i)`` in a box the distance from ``c2 nu_p^d + c3 mu_i`` to the
nearest integer is computed exactly (rational case) or as a certified lower
bound (surd case), and compared with the envelope
``exp(-M(eps x_p)) exp(-M(eps mu_i^{1/2}))``. The largest admissible constant
over the box is

``C_eps = min_{p,i} dist(p, i) exp(M(eps x_p) + M(eps mu_i^{1/2}))``.

Two conventions exist for ``x_p``: the raw index ``p`` (``'linear'``) or
``p^{1/n}`` (``'root'``).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..bases import BasisAxis
from ..weights import AssociatedFunction
from .exact import DEFAULT_BITS, MAX_BITS, Surd, parse_coefficient, sqrt_interval

NESTED = (Fraction(1, 8), Fraction(1, 4), Fraction(1, 2), Fraction(1))
CONVENTIONS = ("linear", "root")


class LiouvilleError(ValueError):
    pass


@dataclass
class LiouvilleRow:
    box: tuple
    eps: float
    log_C: float
    argmin: tuple | None
    min_distance: float

    @property
    def C(self):
        return math.exp(self.log_C) if self.log_C > -math.inf else 0.0


@dataclass
class LiouvilleReport:
    """``C_eps`` fits over nested boxes.

    ``trend[eps]`` lists ``C_eps`` from the smallest to the full box; the
    values are nonincreasing because each box contains the previous one.
    """

    c2: str
    c3: str
    convention: str
    rows: list
    degenerate: bool
    zero_points: int
    unresolved: list = field(default_factory=list)

    @property
    def boxes(self):
        return sorted({r.box for r in self.rows})

    def trend(self, eps):
        return [r.C for r in sorted((r for r in self.rows if r.eps == eps), key=lambda r: r.box)]

    def ratios(self, eps):
        t = self.trend(eps)
        return [b / a if a > 0 else (1.0 if b == 0 else math.inf) for a, b in zip(t, t[1:])]

    def final(self, eps):
        return self.trend(eps)[-1]

    def verdict(self, eps, ratio_floor=0.5, tiny=1e-6):
        """Box evidence only: ``'bounded_on_box'`` or ``'collapsing'``."""
        if self.degenerate:
            return "degenerate"
        t = self.trend(eps)
        if t[-1] < tiny or min(self.ratios(eps) or [1.0]) < ratio_floor:
            return "collapsing"
        return "bounded_on_box"

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["box_p", "box_i", "eps", "C_eps", "log_C_eps", "argmin_p", "argmin_i",
                    "min_distance"])
        for r in sorted(self.rows, key=lambda r: (r.eps, r.box)):
            ap, ai = r.argmin if r.argmin else ("", "")
            w.writerow([r.box[0], r.box[1], repr(r.eps), repr(r.C), repr(r.log_C), ap, ai,
                        repr(r.min_distance)])
        return buf.getvalue()

    def to_dict(self):
        epss = sorted({r.eps for r in self.rows})
        return {
            "c2": self.c2,
            "c3": self.c3,
            "convention": self.convention,
            "degenerate": self.degenerate,
            "zero_points": self.zero_points,
            "unresolved": [list(x) for x in self.unresolved],
            "scope": "evidence on the scanned boxes only",
            "trend": {repr(e): self.trend(e) for e in epss},
            "verdict": {repr(e): self.verdict(e) for e in epss},
        }


def _frac_dist_exact(num, den):
    """Distance to the nearest integer of ``num/den`` (``den > 0``), as a Fraction."""
    r = num % den
    return Fraction(min(r, den - r), den)


def _distance_lower_bounds(c2, c3, nu_d, mu, bits, max_bits):
    """``log`` lower bounds of ``dist(c2 nu_d[p] + c3 mu[i], Z)`` on the grid.

    Returns ``(logd, unresolved)`` with ``logd`` of shape ``(len(nu_d), len(mu))``
    and ``-inf`` where the distance is exactly zero.
    """
    nu_d = [int(v) for v in nu_d]
    mu = [int(v) for v in mu]
    out = np.full((len(nu_d), len(mu)), -np.inf)
    unresolved = []
    if c2.is_rational and c3.is_rational:
        a, b = c2.as_fraction(), c3.as_fraction()
        den = a.denominator * b.denominator // math.gcd(a.denominator, b.denominator)
        A = a.numerator * (den // a.denominator)
        B = b.numerator * (den // b.denominator)
        safe = (abs(A) * max(nu_d) + abs(B) * max(mu)) < (1 << 62)
        if safe:
            N = (A * np.array(nu_d, dtype=np.int64)[:, None]
                 + B * np.array(mu, dtype=np.int64)[None, :])
            r = np.mod(N, den)
            d = np.minimum(r, den - r)
        else:
            d = np.array([[min((A * p + B * m) % den, den - (A * p + B * m) % den)
                           for m in mu] for p in nu_d], dtype=object)
        d = np.asarray(d, dtype=float)
        with np.errstate(divide="ignore"):
            out = np.log(d) - math.log(den)
        return out, unresolved
    # surd case: value = q + sum_D r_D sqrt(D) with rational q, r_D
    for pi, p in enumerate(nu_d):
        for mi, m in enumerate(mu):
            val = c2.scale(p) + c3.scale(m)
            if val.is_rational:
                d = _frac_dist_exact(val.as_fraction().numerator, val.as_fraction().denominator)
                out[pi, mi] = math.log(d) if d else -math.inf
                continue
            b = bits
            while True:
                iv = val.interval(b)
                mid = iv.mid
                dm = abs(mid - round(mid))
                lower = dm - iv.width / 2
                if lower > 0:
                    out[pi, mi] = math.log(lower) if lower > Fraction(1, 1 << 1000) else (
                        math.log(lower.numerator) - math.log(lower.denominator))
                    break
                b *= 2
                if b > max_bits:
                    unresolved.append((pi, mi))
                    out[pi, mi] = -math.inf
                    break
    return out, unresolved


def liouville_scan(c2, c3, W, box, eps=(0.1, 0.5, 1.0), d=1, n=1, m=1,
                   convention="linear", nested=NESTED, bits=DEFAULT_BITS, max_bits=MAX_BITS):
    """Fit ``C_eps`` over nested boxes ``floor(f * box)`` for ``f`` in ``nested``.

    Parameters
    ----------
    c2, c3 : coefficient (rational string, number or surd such as ``'sqrt2'``)
    W : WeightSequence
    box : (pmax, imax)
        Largest linear indices on the laguerre(n) and hermite(m) axes.
    convention : {'linear', 'root'}
        Envelope argument ``eps p`` or ``eps p^{1/n}`` on the laguerre axis.
    """
    if convention not in CONVENTIONS:
        raise LiouvilleError(f"convention must be one of {CONVENTIONS}")
    c2s, c3s = parse_coefficient(c2), parse_coefficient(c3)
    pmax, imax = (int(b) for b in box)
    if pmax < 0 or imax < 0:
        raise LiouvilleError("box bounds must be nonnegative")
    lag, her = BasisAxis.laguerre(n), BasisAxis.hermite(m)
    nu_d = lag.eigenvalues_int(pmax).astype(object) ** d
    mu = her.eigenvalues_int(imax)
    logd, unresolved = _distance_lower_bounds(c2s, c3s, nu_d, mu, bits, max_bits)
    af = AssociatedFunction(W)
    p = np.arange(pmax + 1, dtype=float)
    xp = p if convention == "linear" else p ** (1.0 / n)
    xi = np.sqrt(mu.astype(float))
    zero_points = int(np.sum(np.isneginf(logd)))
    degenerate = zero_points == logd.size
    rows = []
    boxes = sorted({(int(f * pmax), int(f * imax)) for f in nested})
    for e in eps:
        e = float(e)
        score = logd + af.evaluate_many(e * xp)[0][:, None] + af.evaluate_many(e * xi)[0][None, :]
        for bp, bi in boxes:
            sub = score[: bp + 1, : bi + 1]
            k = int(np.argmin(sub))
            pos = np.unravel_index(k, sub.shape)
            dist = logd[: bp + 1, : bi + 1]
            rows.append(LiouvilleRow((bp, bi), e, float(sub[pos]), (int(pos[0]), int(pos[1])),
                                     float(np.exp(np.min(dist)))))
    return LiouvilleReport(str(c2s), str(c3s), convention, rows, degenerate, zero_points,
                           unresolved)


def adversarial_c3(W, box, nested=NESTED, m=1):
    """Rational ``c3`` making one small-box distance tiny against the envelope.

    ``c3 = 1/q1 + 1/(q1 K)`` with ``q1`` an eigenvalue inside the smallest
    nested box and ``K`` the least odd integer ``>= 2 exp(M(q1))``. Then
    ``c3 q1 = 1 + 1/K``, at distance ``1/K`` from the integers.
    """
    imax = int(box[1])
    small = max(0, int(min(nested) * imax))
    her = BasisAxis.hermite(m)
    mu = her.eigenvalues_int(small)
    af = AssociatedFunction(W)
    # largest anchor in the smallest box, capped to keep K of modest size
    q1 = int(mu[-1])
    for v in mu[::-1]:
        if af.evaluate(float(v)).value < 60:
            q1 = int(v)
            break
    K = math.ceil(2 * math.exp(af.evaluate(float(q1)).value))
    if K % 2 == 0:
        K += 1
    return Fraction(1, q1) + Fraction(1, q1 * K)
