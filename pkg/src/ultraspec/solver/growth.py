"""Growth and decay conditions on solution coefficients of the general system.

``g1``: ``|a| <= C exp(sum_s M(l_s j_s) + M(r p^{1/n}) + M(h mu^{1/2}))``
``g2``: the same with negated exponent.

The layout is ``k`` manifold axes (sphere or abstract) followed by one
laguerre axis and one hermite axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..coeffs.decay import QUANTIFIER_CAVEAT, TEST_FUNCTION_LIKE, classify_decay, fit_growth
from ..coeffs.tensor import TensorError

CONDITIONS = ("g1", "g2")


@dataclass
class GrowthVerdict:
    which: str
    holds: bool
    rates: tuple
    C: float
    residual: float
    mode: str
    caveat: str = QUANTIFIER_CAVEAT

    def to_dict(self):
        def num(x):
            return x if math.isfinite(x) else str(x)
        return {"condition": self.which, "holds_on_box": self.holds,
                "rates": [num(r) for r in self.rates], "C": num(self.C),
                "residual": num(self.residual), "mode": self.mode, "caveat": self.caveat}


def check_layout(c):
    kinds = [ax.kind for ax in c.axes]
    if len(kinds) < 2 or kinds[-2] != "laguerre" or kinds[-1] != "hermite" \
            or any(k not in ("sphere", "abstract") for k in kinds[:-2]):
        raise TensorError(
            "layout mismatch: expected manifold axes followed by laguerre and hermite")


def assess_growth_conditions(u, W, which):
    """Fit the ``g1`` (growth) or ``g2`` (decay) envelope to ``u``."""
    if which not in CONDITIONS:
        raise TensorError(f"which must be one of {CONDITIONS}")
    check_layout(u)
    if u.nnz == 0:
        raise TensorError("cannot assess an empty tensor")
    if which == "g2":
        fit = classify_decay(u, W)
        return GrowthVerdict("g2", fit.classification == TEST_FUNCTION_LIKE, fit.rates,
                             fit.C, fit.residual, W.mode)
    from ..coeffs.decay import _constants
    prob, rates = fit_growth(u, W)
    if not all(math.isfinite(h) for h in rates):
        return GrowthVerdict("g1", False, tuple(rates), math.nan, math.nan, W.mode)
    C, resid = _constants(prob, rates, -1)
    return GrowthVerdict("g1", resid <= 0, tuple(rates), C, resid, W.mode)
