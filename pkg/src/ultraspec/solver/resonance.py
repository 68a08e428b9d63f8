"""Resonance sets, zero-data sets and the diagonal solve.

All sets and verdicts refer to the scanned box only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..coeffs.decay import TEST_FUNCTION_LIKE, classify_decay
from ..coeffs.tensor import CoefficientTensor
from .exact import DEFAULT_BITS, MAX_BITS
from .operator import (
    OperatorError,
    SymbolTable,
    interval_zero_test,
    positive_shortcut,
    symbol,
)

F_EMPTY = "F_empty"
F_SUBSET_E = "F_subset_E"
F_NOT_SUBSET_E = "F_not_subset_E"

UNIQUE = "unique"
NON_UNIQUE = "non_unique_with_free_choices"
UNSOLVABLE = "unsolvable"
BEYOND_NOTE = "beyond the treated cases"

PRESERVED = "preserved"
VIOLATED = "violated"
NOT_ASSESSED = "not_assessed"

# candidates for interval resolution: |float symbol| below this
_FLOAT_NEAR_ZERO = 1e-6


class ResolutionInsufficient(ValueError):
    """Some symbol zeros could not be decided."""


@dataclass
class ResonanceReport:
    """Zeros of the symbol (``F``) and structural zeros of the data (``E``) in a box.

    ``E`` is the complement of the data support inside the box and is
    materialised lazily by :meth:`E`.
    """

    box: tuple
    F: list
    support: frozenset
    verdict: str
    witness: tuple | None = None
    saturating: bool = False
    unresolved: list = field(default_factory=list)
    finite_within_truncation: bool = True

    def E(self):
        from .operator import box_indices
        return [idx for idx in box_indices(self.box) if idx not in self.support]

    def in_E(self, idx):
        return tuple(idx) not in self.support

    @property
    def e_count(self):
        return math.prod(b + 1 for b in self.box) - len(self.support)

    @property
    def F_equals_E(self):
        return len(self.F) == self.e_count and all(self.in_E(i) for i in self.F)

    def to_dict(self):
        return {
            "box": list(self.box),
            "scope": "within the scanned box",
            "F": [list(i) for i in self.F],
            "F_count": len(self.F),
            "E_count": self.e_count,
            "verdict": self.verdict,
            "witness": list(self.witness) if self.witness else None,
            "saturating": self.saturating,
            "finite_within_truncation": self.finite_within_truncation,
            "unresolved": [list(i) for i in self.unresolved],
        }


def _resolve_box(f, box):
    if box is None:
        return tuple(f.truncation)
    box = tuple(int(b) for b in box)
    if len(box) != len(f.truncation):
        raise OperatorError("box arity does not match the data")
    if any(b > t for b, t in zip(box, f.truncation)):
        raise OperatorError(f"box {box} exceeds the data truncation {f.truncation}")
    return box


def find_zeros(L, box, resolution="exact", bits=DEFAULT_BITS, max_bits=MAX_BITS):
    """Exact zeros of the symbol in ``box`` and the undecided points.

    ``resolution='exact'`` decides zeros structurally (rational and surd
    coefficients). ``'interval'`` certifies nonzeros by interval refinement
    only and reports points it cannot separate from zero as unresolved.
    """
    if positive_shortcut(L):
        return [], []
    table = SymbolTable(L, box)
    if resolution == "exact" or L.is_rational:
        return table.zero_indices(), []
    F, unresolved = [], []
    for lead, sums in table.chunks():
        near = np.abs(table.float_values(sums)) < _FLOAT_NEAR_ZERO
        for pos in zip(*np.nonzero(near)):
            idx = (int(lead[pos[0]]),) + tuple(int(x) for x in pos[1:])
            if interval_zero_test(L, idx, bits, max_bits) is None:
                unresolved.append(idx)
    return F, unresolved


def resonance_scan(L, f, box=None, resolution="exact", bits=DEFAULT_BITS, max_bits=MAX_BITS):
    """Compare the symbol's zero set with the data's structural zeros."""
    L.check_tensor(f)
    box = _resolve_box(f, box)
    F, unresolved = find_zeros(L, box, resolution, bits, max_bits)
    F.sort()
    support = frozenset(idx for idx in f.keys() if all(i <= b for i, b in zip(idx, box)))
    witness = next((idx for idx in F if idx in support), None)
    if not F:
        verdict = F_EMPTY
    elif witness is None:
        verdict = F_SUBSET_E
    else:
        verdict = F_NOT_SUBSET_E
    saturating = any(any(i == b for i, b in zip(idx, box)) for idx in F)
    return ResonanceReport(box, F, support, verdict, witness, saturating, sorted(unresolved))


@dataclass
class DivisorStats:
    min_abs: float
    argmin: tuple | None
    histogram: list
    bin_edges: list
    scope: str

    def to_dict(self):
        return {"min_abs": self.min_abs, "argmin": list(self.argmin) if self.argmin else None,
                "log10_histogram": self.histogram, "log10_bin_edges": self.bin_edges,
                "scope": self.scope}


def divisor_stats(L, box, F, max_points=1 << 22):
    """Smallest ``|symbol|`` off ``F`` and a log10 histogram, over the box."""
    table = SymbolTable(L, box)
    if table.size > max_points:
        return DivisorStats(float("nan"), None, [], [], "box too large; not computed")
    Fset = set(F)
    best, arg = math.inf, None
    logs = []
    for lead, sums in table.chunks():
        v = np.abs(table.float_values(sums))
        mask = v > 0
        if Fset:
            for idx in Fset:
                if lead[0] <= idx[0] <= lead[-1]:
                    mask[(idx[0] - lead[0],) + idx[1:]] = False
        if mask.any():
            vv = np.where(mask, v, np.inf)
            k = int(np.argmin(vv))
            pos = np.unravel_index(k, vv.shape)
            if vv[pos] < best:
                best = float(vv[pos])
                arg = (int(lead[pos[0]]),) + tuple(int(x) for x in pos[1:])
            logs.append(np.log10(v[mask]))
    if logs:
        allv = np.concatenate(logs)
        hist, edges = np.histogram(allv, bins=12)
        return DivisorStats(best, arg, hist.tolist(), edges.tolist(), "box minus F")
    return DivisorStats(best, arg, [], [], "box minus F")


@dataclass
class SolveReport:
    solution: CoefficientTensor | None
    resonance: ResonanceReport
    free_indices: list
    divisor_stats: DivisorStats | None
    verdict: str
    witness: tuple | None = None
    notes: list = field(default_factory=list)
    hypoellipticity: str = NOT_ASSESSED
    hypo_witness: tuple | None = None
    fits: dict = field(default_factory=dict)

    def to_dict(self, embed_solution=True):
        d = {
            "verdict": self.verdict,
            "witness": list(self.witness) if self.witness else None,
            "notes": self.notes,
            "free_indices": [list(i) for i in self.free_indices],
            "resonance": self.resonance.to_dict(),
            "divisor_stats": self.divisor_stats.to_dict() if self.divisor_stats else None,
            "hypoellipticity": self.hypoellipticity,
            "hypoellipticity_witness": list(self.hypo_witness) if self.hypo_witness else None,
            "fits": {k: v.to_dict() for k, v in self.fits.items()},
        }
        if embed_solution and self.solution is not None:
            d["solution"] = self.solution.to_dict()
        return d


def _divide(b, s):
    if isinstance(s, Fraction):
        if isinstance(b, (Fraction, int)):
            return Fraction(b) / s
        return b / float(s)
    return b / float(s)


def _free_value(policy, idx):
    return policy(idx) if callable(policy) else policy


def solve(L, f, free_value_policy=0, box=None, W=None, resolution="exact",
          bits=DEFAULT_BITS, max_bits=MAX_BITS, stats=True):
    """Solve ``L u = f`` coefficientwise inside ``box``.

    Off the resonance set ``u = f / symbol``; on ``F`` (which must lie in the
    zero-data set) the value comes from ``free_value_policy``, a constant or a
    callable of the index. When ``W`` is given and ``f`` classifies as
    test-function-like, the solution is classified too.
    """
    L.check_tensor(f)
    rep = resonance_scan(L, f, box, resolution, bits, max_bits)
    if rep.unresolved:
        raise ResolutionInsufficient(
            f"resolution insufficient: {len(rep.unresolved)} symbol values not separated "
            f"from zero at {max_bits} bits (first {rep.unresolved[0]})")
    dstats = divisor_stats(L, rep.box, rep.F) if stats else None
    if rep.verdict == F_NOT_SUBSET_E:
        return SolveReport(None, rep, [], dstats, UNSOLVABLE, rep.witness)
    box = rep.box
    u = CoefficientTensor(f.axes, box)
    for idx, b in f.items():
        if all(i <= t for i, t in zip(idx, box)):
            u[idx] = _divide(b, symbol(L, idx, bits))
    for idx in rep.F:
        u[idx] = _free_value(free_value_policy, idx)
    notes = []
    if rep.F:
        verdict = NON_UNIQUE
        if not rep.F_equals_E:
            notes.append(BEYOND_NOTE)
    else:
        verdict = UNIQUE
    out = SolveReport(u, rep, list(rep.F), dstats, verdict, None, notes)
    if W is not None:
        _assess_hypoellipticity(out, f, u, W)
    return out


def _assess_hypoellipticity(report, f, u, W):
    if f.nnz == 0:
        return
    ffit = classify_decay(f, W)
    report.fits["rhs"] = ffit
    if ffit.classification != TEST_FUNCTION_LIKE:
        report.hypoellipticity = NOT_ASSESSED
        return
    if u.nnz == 0:
        report.hypoellipticity = PRESERVED
        return
    ufit = classify_decay(u, W)
    report.fits["solution"] = ufit
    if ufit.classification == TEST_FUNCTION_LIKE:
        report.hypoellipticity = PRESERVED
    else:
        report.hypoellipticity = VIOLATED
        idx, vals = u.arrays()
        report.hypo_witness = tuple(int(x) for x in idx[int(np.argmax(np.abs(vals)))])
