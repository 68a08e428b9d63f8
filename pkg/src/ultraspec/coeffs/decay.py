"""Classification of coefficient decay against ``exp(-M(h g))`` envelopes.

Finite data admits any rate if the constant is free, so the constant is
anchored on the *head* of the tensor: the entries whose envelope argument on
the fitted axis is at most ``HEAD_FRACTION`` of the largest one. A rate ``h``
is feasible on an axis when no entry's residual
``log|a| + sum_a M(h_a g_a)`` exceeds the largest residual in the head, i.e.
the envelope is fixed by the front of the box and must hold on the back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..weights import AssociatedFunction, WeightSequence
from .tensor import CoefficientTensor, TensorError

TEST_FUNCTION_LIKE = "test_function_like"
DUAL_LIKE = "dual_like"
INDETERMINATE = "indeterminate"

# entries below REL_FLOOR * max|a| are treated as round-off in the decay fit
REL_FLOOR = 1e-12
H_MIN, H_MAX = 1e-3, 1e3
_GRID = np.geomspace(H_MIN, H_MAX, 61)
_BISECT = 48
_SLACK = 1e-9
HEAD_FRACTION = 0.5

QUANTIFIER_CAVEAT = (
    "fitted constants only: finite data cannot distinguish the existential "
    "(roumieu) from the universal (beurling) quantifier over the rate"
)


@dataclass
class DecayFit:
    """Fitted envelope for a coefficient tensor.

    ``rates[a] = inf`` means no decay constraint is visible on axis ``a``
    (the data are supported where the envelope argument is minimal).
    ``growth_rates`` is filled for ``dual_like`` fits, where the model is
    ``|b| <= C prod exp(+M(h_a g_a))``.
    """

    classification: str
    rates: tuple
    C: float
    residual: float
    mode: str
    growth_rates: tuple = ()
    growth_C: float = float("nan")
    growth_residual: float = float("nan")
    head: list = field(default_factory=list)
    caveat: str = QUANTIFIER_CAVEAT
    n_used: int = 0

    @property
    def rate(self):
        """Smallest per-axis decay rate."""
        return min(self.rates) if self.rates else float("nan")

    def to_dict(self):
        def num(x):
            return x if math.isfinite(x) else str(x)
        return {
            "classification": self.classification,
            "rates": [num(r) for r in self.rates],
            "C": num(self.C),
            "residual": num(self.residual),
            "growth_rates": [num(r) for r in self.growth_rates],
            "growth_C": num(self.growth_C),
            "growth_residual": num(self.growth_residual),
            "mode": self.mode,
            "head": [list(h) for h in self.head],
            "entries_used": self.n_used,
            "caveat": self.caveat,
        }


class _Problem:
    """Log-magnitudes and per-axis envelope arguments of the used entries."""

    def __init__(self, c, af, rel_floor):
        idx, vals = c.arrays()
        mag = np.abs(vals).astype(float)
        keep = mag >= rel_floor * mag.max() if rel_floor > 0 else mag > 0
        self.idx = idx[keep]
        self.loga = np.log(mag[keep])
        self.g = []
        for a, (ax, t) in enumerate(zip(c.axes, c.truncation)):
            args = ax.envelope_args(int(self.idx[:, a].max()))
            self.g.append(args[self.idx[:, a]])
        total = sum(self.g)
        # entries at the smallest total argument (reported, and used for inf rates)
        self.head = np.flatnonzero(total <= total.min() * (1 + 1e-12) + 1e-15)
        self.gmax = [float(g.max()) for g in self.g]
        self.af = af
        self.slack = _SLACK * max(1.0, float(np.max(np.abs(self.loga))))

    def M(self, a, h):
        if h == 0:
            return np.zeros_like(self.g[a])
        if math.isinf(h):
            return np.where(self.g[a] > 0, np.inf, 0.0)
        return self.af.evaluate_many(h * self.g[a])[0]

    def residuals(self, rates, sign):
        r = self.loga.copy()
        for a, h in enumerate(rates):
            r += sign * self.M(a, h)
        return r

    def front(self, axes=None):
        """Mask of entries in the head region of ``axes`` (all axes by default)."""
        axes = range(len(self.g)) if axes is None else axes
        mask = np.ones(self.loga.size, dtype=bool)
        for a in axes:
            mask &= self.g[a] <= HEAD_FRACTION * self.gmax[a] * (1 + 1e-12) + 1e-15
        return mask

    def feasible(self, rates, sign, axis=None):
        r = self.residuals(rates, sign)
        head = np.max(r[self.front(None if axis is None else [axis])])
        if not np.isfinite(head):
            return False
        with np.errstate(invalid="ignore"):
            return bool(np.all(r <= head + self.slack))

    def visible(self, a, h):
        """Whether the envelope on axis ``a`` is non-trivial on the data."""
        return bool(np.any(self.M(a, h) > 0))


def _largest_feasible(test):
    """Largest grid-and-bisection ``h`` with ``test(h)``; 0 or inf at the ends."""
    if not test(_GRID[0]):
        return 0.0
    lo = _GRID[0]
    for h in _GRID[1:]:
        if not test(h):
            hi = h
            break
        lo = h
    else:
        return math.inf
    for _ in range(_BISECT):
        mid = math.sqrt(lo * hi)
        if test(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _smallest_feasible(test):
    if not test(_GRID[-1]):
        return math.inf
    hi = _GRID[-1]
    for h in _GRID[-2::-1]:
        if not test(h):
            lo = h
            break
        hi = h
    else:
        return 0.0
    for _ in range(_BISECT):
        mid = math.sqrt(lo * hi)
        if test(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _constants(prob, rates, sign):
    """Envelope constant and the back-of-box residual.

    ``C`` bounds every used entry. The residual is the largest residual
    outside the head region minus the largest inside it (``<= 0`` when the
    envelope fixed by the front holds on the back; ``-inf`` if the head
    region is everything). Axes with infinite rate carry no envelope; only
    entries sharing the head's argument on those axes enter (the others were
    certified feasible at the top of the rate grid).
    """
    finite = [h if math.isfinite(h) else 0.0 for h in rates]
    r = prob.residuals(finite, sign)
    sel = np.ones(r.size, dtype=bool)
    for a, h in enumerate(rates):
        if math.isinf(h):
            sel &= prob.g[a] <= np.min(prob.g[a][prob.head]) + 1e-15
    front = prob.front() & sel
    log_c = float(np.max(r[sel]))
    back = sel & ~front
    if not back.any() or not front.any():
        return math.exp(log_c), -math.inf
    resid = float(np.max(r[back]) - np.max(r[front]))
    if resid <= prob.slack:
        resid = min(resid, 0.0)
    return math.exp(log_c), resid


def fit_decay(c, W, rel_floor=REL_FLOOR, af=None):
    """Per-axis decay rates, lexicographic in axis order."""
    prob = _Problem(c, af or AssociatedFunction(W), rel_floor)
    k = len(c.axes)
    rates = [0.0] * k
    for a in range(k):
        def test(h, a=a):
            trial = list(rates)
            trial[a] = h
            return prob.feasible(trial, +1, a)
        h = _largest_feasible(test)
        if 0 < h < math.inf and not prob.visible(a, h):
            h = 0.0
        rates[a] = h
    return prob, rates


def fit_growth(c, W, rel_floor=0.0, af=None):
    """Per-axis growth rates, minimised lexicographically."""
    prob = _Problem(c, af or AssociatedFunction(W), rel_floor)
    k = len(c.axes)
    rates = [H_MAX] * k
    for a in range(k):
        def test(h, a=a):
            trial = [H_MAX] * k
            trial[a] = h
            return prob.feasible(trial, -1, a)
        rates[a] = _smallest_feasible(test)
    # each axis was fitted against capped neighbours and can come out low;
    # inflate all rates by the smallest common factor that is jointly feasible
    if all(math.isfinite(h) for h in rates) and not prob.feasible(rates, -1):
        def joint(tau):
            return prob.feasible([h * tau for h in rates], -1)
        top = H_MAX / max(min(h for h in rates if h > 0) if any(rates) else H_MAX, H_MIN)
        if not joint(top):
            return prob, [math.inf] * k
        lo, hi = 1.0, top
        for _ in range(_BISECT):
            mid = math.sqrt(lo * hi)
            if joint(mid):
                hi = mid
            else:
                lo = mid
        rates = [h * hi for h in rates]
    return prob, rates


def classify_decay(c, W, rel_floor=REL_FLOOR):
    """Fit ``|a_idx| <= C prod_a exp(-M(h_a g_a(idx_a)))``.

    ``g_a`` is the axis envelope argument (degree ``j`` on spheres, ``p^{1/n}``
    on laguerre axes, ``mu^{1/2}`` on hermite axes, ``lambda^{1/order}`` on
    abstract axes). Rates are maximised axis by axis with the constant fixed
    by the head entries. If some axis admits no decay, a growth fit
    ``|b| <= C prod exp(+M(h_a g_a))`` is attempted.

    Returns
    -------
    DecayFit
    """
    if not isinstance(c, CoefficientTensor):
        raise TensorError("classify_decay expects a CoefficientTensor")
    if c.nnz == 0:
        raise TensorError("cannot classify an empty tensor")
    if not isinstance(W, WeightSequence):
        raise TensorError("classify_decay expects a WeightSequence")
    af = AssociatedFunction(W)
    prob, rates = fit_decay(c, W, rel_floor, af)
    C, resid = _constants(prob, rates, +1)
    head = [tuple(int(v) for v in prob.idx[i]) for i in prob.head]
    fit = DecayFit(INDETERMINATE, tuple(rates), C, resid, W.mode, head=head,
                   n_used=int(prob.idx.shape[0]))
    if all(h > 0 for h in rates):
        fit.classification = TEST_FUNCTION_LIKE
        return fit
    gprob, grates = fit_growth(c, W, 0.0, af)
    if all(math.isfinite(h) for h in grates):
        gC, gres = _constants(gprob, grates, -1)
        fit.growth_rates, fit.growth_C, fit.growth_residual = tuple(grates), gC, gres
        fit.classification = DUAL_LIKE
    return fit
