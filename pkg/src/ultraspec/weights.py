"""Weight sequences ``M_p``, prefix checks of their structural conditions, and
the associated function ``M(t) = sup_p log+ (t^p / M_p)``.

All condition verdicts are statements about the materialised prefix
``p <= horizon``; asymptotic quantifiers cannot be decided from finite data.
"""

from __future__ import annotations

import json
import math
import threading
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln

from . import kernels

ROUMIEU = "roumieu"
BEURLING = "beurling"
MODES = (ROUMIEU, BEURLING)
GENERATORS = ("gevrey", "table", "factorial_scaled")

HOLDS = "holds_on_prefix"
FAILS = "fails_at"
INCONCLUSIVE = "inconclusive"

MIN_HORIZON = 2
# condition checks need one more index than materialisation
MIN_CHECK_HORIZON = 3
# relative slack for float comparisons of log-values
_TOL = 1e-12


class WeightError(ValueError):
    """Invalid weight sequence or unsupported request."""


class HorizonLimitedWarning(UserWarning):
    """The supremum in ``M(t)`` was attained at the last materialised index."""


def _as_number(x):
    if isinstance(x, (Fraction, int)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    return float(x)


def _leq(a, b):
    return a <= b + _TOL * max(1.0, abs(a), abs(b))


@dataclass(frozen=True, eq=False)
class WeightSequence:
    """A weight sequence materialised up to ``horizon``.

    Use :func:`make_weight` to construct one. ``log_values[p] = log M_p``.
    """

    generator: str
    params: dict
    horizon: int
    mode: str = ROUMIEU
    diagnostic: bool = False
    log_values: np.ndarray = field(default=None, repr=False)

    @property
    def values(self):
        """``M_p`` as floats (``inf`` where the value overflows)."""
        with np.errstate(over="ignore"):
            return np.exp(self.log_values)

    @property
    def log_convex(self):
        d = np.diff(self.log_values)
        return bool(np.all(np.diff(d) >= -_TOL * np.maximum(1.0, np.abs(d[1:]))))

    @property
    def extendable(self):
        return self.generator != "table"

    def exact_value(self, p):
        """``M_p`` as a Fraction when the generator admits exact values, else None."""
        if self.generator == "table":
            return self.params["values"][p]
        if self.generator == "gevrey":
            s = self.params["s"]
            if isinstance(s, Fraction) and s.denominator == 1:
                return Fraction(math.factorial(p)) ** int(s)
            return None
        a = self.params["a"]
        if isinstance(a, Fraction):
            return Fraction(math.factorial(p)) / a**p
        return None

    def extend(self, horizon):
        """Return the same sequence materialised up to ``horizon``."""
        if horizon <= self.horizon:
            return self
        if not self.extendable:
            raise WeightError("table sequences cannot be extended beyond their data")
        return make_weight(self.generator, horizon, self.mode,
                           diagnostic=self.diagnostic, **self.params)

    def with_mode(self, mode):
        return make_weight(self.generator, self.horizon, mode,
                           diagnostic=self.diagnostic, **self.params)

    def to_dict(self):
        params = {}
        for k, v in self.params.items():
            if k == "values":
                params[k] = [str(x) for x in v]
            else:
                params[k] = str(v) if isinstance(v, Fraction) else v
        return {
            "generator": self.generator,
            "params": params,
            "horizon": self.horizon,
            "mode": self.mode,
            "diagnostic": self.diagnostic,
            "values": [_format_log_value(v) for v in self.log_values],
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d):
        params = dict(d.get("params", {}))
        return make_weight(d["generator"], int(d["horizon"]), d.get("mode", ROUMIEU),
                           diagnostic=bool(d.get("diagnostic", False)), **params)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def _format_log_value(lv):
    """Decimal string of ``exp(lv)`` that survives overflow of doubles."""
    if lv < 700:
        return repr(float(np.exp(lv)))
    e10 = lv / math.log(10.0)
    exponent = math.floor(e10)
    mantissa = 10.0 ** (e10 - exponent)
    return f"{mantissa:.15f}e+{exponent}"


def make_weight(generator, horizon=None, mode=ROUMIEU, *, diagnostic=False, **params):
    """Materialise a weight sequence.

    Parameters
    ----------
    generator : {'gevrey', 'table', 'factorial_scaled'}
        ``gevrey`` takes ``s`` (``M_p = p!^s``), ``table`` takes ``values``,
        ``factorial_scaled`` takes ``a`` (``M_p = p!/a^p``).
    horizon : int
        Largest materialised ``p``. Defaults to ``len(values) - 1`` for tables.
    mode : {'roumieu', 'beurling'}
    diagnostic : bool
        Required for ``factorial_scaled``, whose ``M_1 = 1/a`` breaks the
        normalisation ``M_0 = M_1 = 1``.
    """
    if generator not in GENERATORS:
        raise WeightError(f"unknown generator {generator!r}")
    mode = str(mode).lower()
    if mode not in MODES:
        raise WeightError(f"mode must be one of {MODES}")

    if generator == "table":
        if "values" not in params:
            raise WeightError("table generator needs 'values'")
        vals = [_as_number(v) for v in params["values"]]
        if horizon is None:
            horizon = len(vals) - 1
        if horizon > len(vals) - 1:
            raise WeightError("horizon exceeds the table length")
        vals = vals[: horizon + 1]
        for p, v in enumerate(vals):
            if not (v > 0) or not math.isfinite(float(v)):
                raise WeightError(f"M_{p} = {v} is not a positive finite number")
        if len(vals) > 1 and (vals[0] != 1 or vals[1] != 1):
            raise WeightError("table sequences must have M_0 = M_1 = 1")
        log_values = np.log(np.array([float(v) for v in vals]))
        params = {"values": tuple(vals)}
    elif generator == "gevrey":
        if horizon is None:
            raise WeightError("horizon is required")
        s = _as_number(params.get("s", 1))
        if not s > 0:
            raise WeightError("gevrey exponent s must be positive")
        log_values = float(s) * gammaln(np.arange(horizon + 1) + 1.0)
        params = {"s": s}
    else:
        if horizon is None:
            raise WeightError("horizon is required")
        a = _as_number(params.get("a", 1))
        if not a > 0:
            raise WeightError("factorial_scaled parameter a must be positive")
        if not diagnostic:
            raise WeightError(
                "factorial_scaled violates M_1 = 1; pass diagnostic=True to use it"
            )
        p = np.arange(horizon + 1)
        log_values = gammaln(p + 1.0) - p * math.log(float(a))
        params = {"a": a}

    if horizon < MIN_HORIZON:
        raise WeightError(f"horizon must be at least {MIN_HORIZON}")
    log_values = np.ascontiguousarray(log_values, dtype=np.float64)
    log_values.setflags(write=False)
    return WeightSequence(generator, params, int(horizon), mode, bool(diagnostic), log_values)


def gevrey(s, horizon, mode=ROUMIEU):
    return make_weight("gevrey", horizon, mode, s=s)


# ---------------------------------------------------------------------------
# condition checks
# ---------------------------------------------------------------------------


@dataclass
class ConditionVerdict:
    """Outcome of one prefix check.

    ``lhs`` and ``rhs`` are natural logarithms of the two sides of the
    violated inequality when ``status == 'fails_at'``.
    """

    status: str
    index: int | None = None
    aux_index: int | None = None
    lhs: float | None = None
    rhs: float | None = None
    note: str = ""

    @property
    def holds(self):
        return self.status == HOLDS

    def to_dict(self):
        d = {"status": self.status}
        for k in ("index", "aux_index", "lhs", "rhs"):
            v = getattr(self, k)
            if v is not None:
                d[k] = v
        if self.note:
            d["note"] = self.note
        return d


@dataclass
class ConditionReport:
    horizon: int
    mode: str
    verdicts: dict
    witnesses: dict

    def __getitem__(self, key):
        return self.verdicts[key]

    def to_dict(self):
        return {
            "horizon": self.horizon,
            "mode": self.mode,
            "scope": "verdicts hold on the prefix p <= horizon only",
            "verdicts": {k: v.to_dict() for k, v in self.verdicts.items()},
            "witnesses": _jsonable(self.witnesses),
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def growth_class(g, lin_tol=0.02, sup_tol=0.05):
    """Classify how a log-sequence ``g_p`` grows relative to linear.

    The first differences on the second half of the prefix are regressed on
    ``[1, log p, 1/p]``. The ``log p`` coefficient separates linear growth
    (bounded slopes) from ``p log p``-type growth or decay.

    Returns
    -------
    cls : {'linear', 'up', 'down', 'inconclusive'}
    beta : float
        The ``log p`` coefficient.
    """
    g = np.asarray(g, dtype=float)
    n = g.size - 1
    d = np.diff(g)
    # pairwise means remove period-2 oscillation (e.g. central binomials)
    d = 0.5 * (d[1:] + d[:-1])
    p = np.arange(1, d.size + 1, dtype=float) + 0.5
    n = d.size
    sel = p >= max(2.0, n / 2.0)
    if sel.sum() < 4:
        return INCONCLUSIVE, float("nan")
    X = np.column_stack([np.ones(sel.sum()), np.log(p[sel]), 1.0 / p[sel]])
    coef, *_ = np.linalg.lstsq(X, d[sel], rcond=None)
    beta = float(coef[1])
    if beta > sup_tol:
        return "up", beta
    if beta < -sup_tol:
        return "down", beta
    if abs(beta) <= lin_tol:
        return "linear", beta
    return INCONCLUSIVE, beta


def _line_fit(g, start=0):
    """Rate and constant of ``g_p <= logC + p*log(rate)`` on the tail slopes."""
    n = g.size - 1
    d = np.diff(g)
    half = d[max(0, n // 2 - 1):] if n >= 2 else d
    log_rate = float(np.max(half)) if half.size else 0.0
    p = np.arange(g.size)
    log_c = float(np.max(g[start:] - p[start:] * log_rate))
    return log_rate, log_c


def _search_violation(g, log_rate, fit_upto, start=0):
    """Fit the constant on ``p <= fit_upto`` and return the first violating p."""
    p = np.arange(g.size)
    log_c = float(np.max(g[start:fit_upto + 1] - p[start:fit_upto + 1] * log_rate))
    rhs = log_c + p * log_rate
    for q in range(fit_upto + 1, g.size):
        if not _leq(g[q], rhs[q]):
            return q, float(g[q]), float(rhs[q]), log_c
    return None


def _failing(g, log_rate, start=0, label=""):
    n = g.size - 1
    hit = _search_violation(g, log_rate, max(start + 1, n // 4), start)
    if hit is None:
        return ConditionVerdict(INCONCLUSIVE, note=f"{label} growth not resolved on prefix")
    q, lhs, rhs, log_c = hit
    return ConditionVerdict(FAILS, index=q, lhs=lhs, rhs=rhs,
                            note=f"{label} constant fitted on p <= {max(start + 1, n // 4)}, "
                                 f"rate {math.exp(log_rate):.6g}")


def _check_m1(W):
    lm = W.log_values
    exact = all(W.exact_value(p) is not None for p in range(min(3, W.horizon + 1)))
    for p in range(1, W.horizon):
        if exact:
            a, b, c = W.exact_value(p - 1), W.exact_value(p), W.exact_value(p + 1)
            ok = b * b <= a * c
        else:
            ok = _leq(2 * lm[p], lm[p - 1] + lm[p + 1])
        if not ok:
            return ConditionVerdict(FAILS, index=p, lhs=float(2 * lm[p]),
                                    rhs=float(lm[p - 1] + lm[p + 1]),
                                    note="M_p^2 <= M_{p-1} M_{p+1}")
    return ConditionVerdict(HOLDS)


def _stability_gap(W):
    """``r_p = log M_p - min_{1<=q<=p} log(M_q M_{p-q})`` for p >= 1."""
    lm = W.log_values
    n = W.horizon
    r = np.zeros(n + 1)
    for p in range(1, n + 1):
        q = np.arange(1, p + 1)
        r[p] = lm[p] - np.min(lm[q] + lm[p - q])
    return r


def _check_m2(W):
    r = _stability_gap(W)
    cls, beta = growth_class(r[1:])
    if cls in ("linear", "down"):
        log_h, _ = _line_fit(r[1:])
        log_h = max(0.0, log_h)
        p = np.arange(1, W.horizon + 1)
        log_a = float(np.max(r[1:] - p * log_h))
        return ConditionVerdict(HOLDS), {"A": math.exp(log_a), "H": math.exp(log_h)}
    if cls == "up":
        log_h, _ = _line_fit(r[1:max(3, W.horizon // 4) + 1])
        v = _failing(r, max(0.0, log_h), start=1, label="(M.2)")
        return v, {}
    return ConditionVerdict(INCONCLUSIVE, note=f"log p coefficient {beta:.3g}"), {}


def _lower_growth(W, log_lower):
    """``g_p = log(lower_p) - log M_p``."""
    return log_lower - W.log_values


def _check_m0(W):
    p = np.arange(W.horizon + 1)
    g = _lower_growth(W, 0.5 * gammaln(p + 1.0))
    return _check_quantified(W, g, "(M.0)", floor=None)


def _check_m0s(W):
    p = np.arange(W.horizon + 1)
    g = _lower_growth(W, gammaln(p + 1.0))
    return _check_quantified(W, g, "(M.0^s)", floor=0.0)


_BEURLING_RATES = (1.0, 0.5, 0.25, 0.125, 0.0625)


def _check_quantified(W, g, label, floor):
    """Check ``g_p <= log C + p log(rate)`` under the sequence's quantifier mode.

    ``floor`` is the log of the smallest admissible rate (``H_0 > 1`` for
    (M.0^s)); ``None`` means any positive rate (``l > 0`` for (M.0)).
    """
    cls, beta = growth_class(g)
    p = np.arange(g.size)
    if cls == INCONCLUSIVE:
        return ConditionVerdict(INCONCLUSIVE, note=f"log p coefficient {beta:.3g}"), {}
    if cls == "up":
        log_rate, _ = _line_fit(g[: max(3, W.horizon // 4) + 1])
        return _failing(g, log_rate, label=label), {}

    log_rate, _ = _line_fit(g)
    if W.mode == ROUMIEU:
        if floor is not None:
            log_rate = max(log_rate, floor)
        log_c = float(np.max(g - p * log_rate))
        return ConditionVerdict(HOLDS), {"C": math.exp(log_c), "rate": math.exp(log_rate)}

    # Beurling: every admissible rate must work
    tail = float(np.mean(np.diff(g)[-max(2, g.size // 8):]))
    if cls == "down" or (floor is not None and tail <= floor + 1e-9):
        rates = [r for r in _BEURLING_RATES if floor is None or math.log(r) >= floor]
        if floor is not None:
            rates = [1.0 + x for x in (1.0, 0.5, 0.25, 0.125)]
        table = {r: math.exp(float(np.max(g - p * math.log(r)))) for r in rates}
        return ConditionVerdict(HOLDS), {"C_per_rate": table}
    # linear with positive tail slope (or any linear slope when rates may go to 0)
    if floor is None:
        bad = tail - math.log(2.0)
    else:
        bad = 0.5 * (tail + floor)
    v = _failing(g, bad, label=label)
    return v, {}


def _check_m00(W):
    """Largest m violating ``M_p >= M_m m^(p-m)`` for some p > m, searched on the prefix."""
    lm = W.log_values
    n = W.horizon
    worst = None
    for m in range(n - 1, 0, -1):
        q = np.arange(m + 1, n + 1)
        rhs = lm[m] + (q - m) * math.log(m)
        lhs = lm[q]
        bad = lhs < rhs - _TOL * np.maximum(1.0, np.abs(rhs))
        if bad.any():
            k = int(np.argmax(bad))
            worst = (m, int(q[k]), float(lhs[k]), float(rhs[k]))
            break
    m0 = 0 if worst is None else worst[0]
    if m0 <= n // 2:
        return ConditionVerdict(HOLDS), {"m0": m0}
    m, q, lhs, rhs = worst
    return ConditionVerdict(FAILS, index=q, aux_index=m, lhs=lhs, rhs=rhs,
                            note="M_p >= M_m m^(p-m) violated; (index=p, aux_index=m)"), {}


def check_conditions(W):
    """Check (M.1), (M.2), (M.0), (M.0^s) and (M.00) on the prefix of ``W``.

    Verdict keys are ``'M.1'``, ``'M.2'``, ``'M.0'``, ``'M.0s'``, ``'M.00'`` and
    ``'normalized'`` (``M_0 = M_1 = 1``).
    """
    if W.horizon < MIN_CHECK_HORIZON:
        raise WeightError(f"horizon must be at least {MIN_CHECK_HORIZON}")
    verdicts, witnesses = {}, {}
    lm = W.log_values
    if abs(lm[0]) <= _TOL and abs(lm[1]) <= _TOL:
        verdicts["normalized"] = ConditionVerdict(HOLDS)
    else:
        verdicts["normalized"] = ConditionVerdict(
            FAILS, index=0 if abs(lm[0]) > _TOL else 1,
            lhs=float(lm[0] if abs(lm[0]) > _TOL else lm[1]), rhs=0.0,
            note="M_0 = M_1 = 1 required outside diagnostic mode")
    verdicts["M.1"] = _check_m1(W)
    verdicts["M.2"], witnesses["M.2"] = _check_m2(W)
    verdicts["M.0"], witnesses["M.0"] = _check_m0(W)
    verdicts["M.0s"], witnesses["M.0s"] = _check_m0s(W)
    verdicts["M.00"], witnesses["M.00"] = _check_m00(W)
    return ConditionReport(W.horizon, W.mode, verdicts, witnesses)


# ---------------------------------------------------------------------------
# associated function
# ---------------------------------------------------------------------------


class AssocValue(NamedTuple):
    value: float
    argmax: int
    horizon_limited: bool


class AssociatedFunction:
    """Evaluator for ``M(t) = max_p log+ (t^p / M_p)``.

    When ``auto_extend`` is set and the maximising index sits at the end of
    the materialised prefix, generator-backed sequences are re-materialised
    with a larger horizon (up to ``max_horizon``). Results that are still
    horizon-limited are flagged, and the scalar call emits
    :class:`HorizonLimitedWarning`.
    """

    def __init__(self, source, auto_extend=True, max_horizon=1 << 20):
        self._seq = source
        self.auto_extend = auto_extend
        self.max_horizon = max_horizon
        self._lock = threading.Lock()
        self._cache = {}

    @property
    def source(self):
        return self._seq

    def _kernel(self, seq, log_t):
        return kernels.assoc_max(seq.log_values, log_t, seq.log_convex)

    def evaluate_many(self, t):
        """Vectorised evaluation; returns ``(values, argmax, horizon_limited)``."""
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            log_t = np.where(t > 0, np.log(np.where(t > 0, t, 1.0)), -np.inf)
        seq = self._seq
        vals, arg = self._kernel(seq, log_t)
        limited = (arg >= seq.horizon) & (vals > 0)
        while limited.any() and self.auto_extend and seq.extendable \
                and seq.horizon < self.max_horizon:
            need = self._horizon_hint(seq, float(np.max(t[limited])))
            seq = seq.extend(min(self.max_horizon, max(2 * seq.horizon, need)))
            vals, arg = self._kernel(seq, log_t)
            limited = (arg >= seq.horizon) & (vals > 0)
        if seq is not self._seq:
            with self._lock:
                if seq.horizon > self._seq.horizon:
                    self._seq = seq
        return vals, arg, limited

    @staticmethod
    def _horizon_hint(seq, t):
        if seq.generator == "gevrey":
            s = float(seq.params["s"])
            return int(2 * t ** (1.0 / s)) + 8
        if seq.generator == "factorial_scaled":
            return int(2 * t * float(seq.params["a"])) + 8
        return 2 * seq.horizon

    def evaluate(self, t):
        t = float(t)
        if t <= 0:
            return AssocValue(0.0, 0, False)
        hit = self._cache.get(t)
        if hit is not None:
            return hit
        v, a, lim = self.evaluate_many(np.array([t]))
        res = AssocValue(float(v[0]), int(a[0]), bool(lim[0]))
        with self._lock:
            if len(self._cache) < 65536:
                self._cache[t] = res
        return res

    def __call__(self, t):
        if np.ndim(t) == 0:
            res = self.evaluate(t)
            if res.horizon_limited:
                warnings.warn(f"M({t}) is horizon-limited at p = {res.argmax}",
                              HorizonLimitedWarning, stacklevel=2)
            return res.value
        vals, arg, lim = self.evaluate_many(t)
        if lim.any():
            warnings.warn(f"{int(lim.sum())} evaluations are horizon-limited",
                          HorizonLimitedWarning, stacklevel=2)
        return vals

    def envelope(self, h, x):
        """``exp(-M(h x))``, with the same horizon certification as ``__call__``."""
        if h <= 0:
            raise WeightError("h must be positive")
        if np.any(np.asarray(x) < 0):
            raise WeightError("x must be nonnegative")
        return np.exp(-self(np.asarray(h * np.asarray(x, dtype=float))))


def assoc_eval(af, t):
    """``M(t)`` with its maximising index and horizon flag."""
    if t <= 0:
        raise WeightError("t must be positive")
    return af.evaluate(t)


def assoc_inverse_envelope(af, h, x):
    """``exp(-M(h x))``."""
    res = af.evaluate(h * x) if x > 0 else AssocValue(0.0, 0, False)
    if h <= 0 or x < 0:
        raise WeightError("need h > 0 and x >= 0")
    if res.horizon_limited:
        warnings.warn("envelope is horizon-limited", HorizonLimitedWarning, stacklevel=2)
    return math.exp(-res.value)


# ---------------------------------------------------------------------------
# auxiliary inequalities used by the expansion estimates
# ---------------------------------------------------------------------------


def subadditivity_violations(af, xs, ys):
    """Grid points where ``M(x+y) <= M(2x) + M(2y)`` fails."""
    xs = np.asarray(xs, float)[:, None]
    ys = np.asarray(ys, float)[None, :]
    xx, yy = np.broadcast_arrays(xs, ys)
    lhs = af.evaluate_many(xx + yy)[0]
    rhs = af.evaluate_many(2 * xx)[0] + af.evaluate_many(2 * yy)[0]
    bad = lhs > rhs + 1e-9 * np.maximum(1.0, rhs)
    return list(zip(xx[bad].tolist(), yy[bad].tolist()))


def half_index_bounds(W):
    """Check ``M_{p//2} <= sqrt(M_p)`` and fit ``sqrt(M_p) <= C h^p M_{p//2}``.

    Returns
    -------
    violations : list of int
        Indices where the lower inequality fails.
    C, h : float
        Fitted constants for the upper inequality over the prefix.
    """
    lm = W.log_values
    p = np.arange(W.horizon + 1)
    half = lm[p // 2]
    root = 0.5 * lm
    bad = half > root + _TOL * np.maximum(1.0, np.abs(root))
    g = root - half
    log_h, _ = _line_fit(g)
    log_h = max(log_h, 0.0)
    log_c = float(np.max(g - p * log_h))
    return [int(i) for i in p[bad]], math.exp(log_c), math.exp(log_h)


def index_shift_violations(W, h, m0=0):
    """Pairs ``(m, p)``, ``m0 <= m < p``, where ``h^m M_m / m^m <= h^p M_p / m^p`` fails."""
    if h <= 1:
        raise WeightError("h must exceed 1")
    lm = W.log_values
    out = []
    lh = math.log(h)
    for m in range(max(1, m0), W.horizon):
        q = np.arange(m + 1, W.horizon + 1)
        lhs = m * lh + lm[m] - m * math.log(m)
        rhs = q * lh + lm[q] - q * math.log(m)
        bad = lhs > rhs + _TOL * np.maximum(1.0, np.abs(rhs))
        out.extend((m, int(x)) for x in q[bad])
    return out


def lower_bound_violations(af, rhos):
    """Pairs ``(rho, p)`` where ``M_p >= rho^p / exp(M(rho))`` fails."""
    W = af.source
    rhos = np.asarray(rhos, float)
    m = af.evaluate_many(rhos)[0]
    p = np.arange(W.horizon + 1)
    lhs = W.log_values[None, :]
    rhs = p[None, :] * np.log(rhos)[:, None] - m[:, None]
    bad = lhs < rhs - 1e-9 * np.maximum(1.0, np.abs(rhs))
    r, q = np.nonzero(bad)
    return [(float(rhos[i]), int(j)) for i, j in zip(r, q)]
