import math
import os
import random
import subprocess
import sys
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from ultraspec.bases import BasisAxis
from ultraspec.coeffs import CoefficientTensor, TensorError
from ultraspec.solver import (
    Factor,
    OperatorError,
    OperatorSpec,
    ResolutionInsufficient,
    Surd,
    adversarial_c3,
    assess_growth_conditions,
    forward_apply,
    liouville_scan,
    parse_coefficient,
    resonance_scan,
    solve,
    symbol,
)
from ultraspec.solver.exact import ExactError, sqrt_interval
from ultraspec.solver.resonance import (
    BEYOND_NOTE,
    NON_UNIQUE,
    PRESERVED,
    UNIQUE,
    UNSOLVABLE,
)
from ultraspec.weights import make_weight

G1 = make_weight("gevrey", 200, s=1)


def brute_symbol(c1, c2, c3, idx, h=1, d=1):
    """sphere(3) x laguerre(1) x hermite(1) symbol straight from the spectra."""
    j = math.isqrt(idx[0])
    return c1 * Fraction(j * (j + 1)) ** h + c2 * Fraction(idx[1]) ** d + c3 * (2 * idx[2] + 1)


# -- exact arithmetic ------------------------------------------------------------

@pytest.mark.parametrize("text,expr", [
    ("3/4", sympy.Rational(3, 4)),
    ("sqrt2", sympy.sqrt(2)),
    ("-1/2*sqrt(3)", -sympy.sqrt(3) / 2),
    ("1 + sqrt8", 1 + 2 * sympy.sqrt(2)),
    ({"algebraic": "sqrt12 - 2*sqrt3"}, sympy.Integer(0)),
    (0.1, sympy.Rational(1, 10)),
])
def test_parse_coefficient_against_sympy(text, expr):
    s = parse_coefficient(text)
    ref = sum(sympy.Rational(c.numerator, c.denominator) * sympy.sqrt(D)
              for D, c in s.terms.items())
    assert sympy.simplify(ref - expr) == 0
    assert s.is_zero() == (sympy.simplify(expr) == 0)


def test_parse_rejects_garbage():
    with pytest.raises(ExactError):
        parse_coefficient("pi")
    with pytest.raises(ExactError):
        parse_coefficient({"value": 1})


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 10**6), st.integers(4, 200))
def test_sqrt_interval_brackets(D, bits):
    lo, hi = sqrt_interval(D, bits)
    assert lo * lo <= D <= hi * hi and hi - lo <= Fraction(1, 2**bits)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.sampled_from([1, 2, 3, 5, 6, 8, 12, 18]),
                          st.fractions(max_denominator=20)), max_size=5))
def test_surd_sign_matches_sympy(terms):
    s = Surd()
    ref = sympy.Integer(0)
    for D, c in terms:
        s = s + Surd({D: c})
        ref += sympy.Rational(c.numerator, c.denominator) * sympy.sqrt(D)
    ref = sympy.nsimplify(ref)
    assert s.is_zero() == (ref == 0)
    if not s.is_zero():
        assert s.sign() == (1 if ref > 0 else -1)


def test_precision_env_var():
    code = "from ultraspec.solver.exact import DEFAULT_BITS; print(DEFAULT_BITS)"
    env = dict(os.environ, ULTRASPEC_PRECISION="256")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.stdout.strip() == "256"


# -- operators -------------------------------------------------------------------

def test_symbol_matches_spectra():
    L = OperatorSpec.tri(c2="3/2", c3="-1/3", h=2, d=3)
    rng = random.Random(0)
    for _ in range(200):
        idx = (rng.randint(0, 80), rng.randint(0, 40), rng.randint(0, 40))
        assert symbol(L, idx) == brute_symbol(1, Fraction(3, 2), Fraction(-1, 3), idx, 2, 3)


def test_operator_json_round_trip(tmp_path):
    L = OperatorSpec.tri(c2="sqrt2", c3="-1/2")
    path = tmp_path / "L.json"
    path.write_text(L.to_json())
    M = OperatorSpec.load(path)
    assert M.to_dict() == L.to_dict() and not M.is_rational and M.radicals == [1, 2]
    with pytest.raises(OperatorError):
        OperatorSpec.from_json('{"factors": [{"coeff": "1"}]}')
    with pytest.raises(OperatorError):
        Factor(BasisAxis.laguerre(1), "1", 0)


def test_arity_mismatch_rejected():
    L = OperatorSpec.tri()
    with pytest.raises(OperatorError):
        forward_apply(L, CoefficientTensor([BasisAxis.laguerre(1)], 3, {(1,): 1}))


def test_abstract_axis_operator():
    ax = BasisAxis.abstract(["0", "1/2", "1", "3/2"], "A")
    L = OperatorSpec([Factor(ax, "2"), Factor(BasisAxis.hermite(1), "-1")])
    f = CoefficientTensor(L.axes, (3, 3), {(3, 0): 1})
    rep = resonance_scan(L, f)
    # 2 lambda = 2i + 1 at lambda = 1/2, 3/2
    assert rep.F == [(1, 0), (3, 1)]


# -- resonance and solve ---------------------------------------------------------

def brute_F(c2, c3, box):
    return sorted(idx for idx in product(*(range(b + 1) for b in box))
                  if brute_symbol(1, c2, c3, idx) == 0)


def test_resonance_set_enumerated():
    L = OperatorSpec.tri(c2=1, c3=-1)
    box = (15, 12, 10)
    f = CoefficientTensor(L.axes, box)
    rep = resonance_scan(L, f)
    assert rep.F == brute_F(1, -1, box)
    assert rep.verdict == "F_subset_E"
    assert rep.saturating == any(any(i == b for i, b in zip(idx, box)) for idx in rep.F)
    assert rep.e_count == 16 * 13 * 11


def test_unsolvable_witness():
    L = OperatorSpec.tri(c2=1, c3=-1)
    box = (8, 8, 8)
    F = brute_F(1, -1, box)
    f = CoefficientTensor(L.axes, box, {F[3]: Fraction(2), (0, 0, 0): 1})
    rep = solve(L, f)
    assert rep.verdict == UNSOLVABLE and rep.witness == F[3] and rep.solution is None


def test_non_unique_with_free_values():
    L = OperatorSpec.tri(c2=1, c3=-1)
    box = (8, 8, 8)
    F = set(brute_F(1, -1, box))
    f = CoefficientTensor(L.axes, box, {(0, 0, 0): Fraction(5)})
    rep = solve(L, f, free_value_policy=Fraction(7))
    assert rep.verdict == NON_UNIQUE and set(rep.free_indices) == F
    assert all(rep.solution[i] == 7 for i in F)
    assert rep.solution[(0, 0, 0)] == -5
    assert BEYOND_NOTE in rep.notes  # F is a proper subset of E here


def test_positive_operator_unique_and_exact():
    L = OperatorSpec.tri(c2="1/3", c3="2/7", h=2)
    rng = random.Random(5)
    box = (32, 32, 32)
    u = CoefficientTensor(L.axes, box, {
        tuple(rng.randint(0, 32) for _ in range(3)): Fraction(rng.randint(-50, 50) or 1,
                                                              rng.randint(1, 9))
        for _ in range(40)})
    rep = solve(L, forward_apply(L, u))
    assert rep.verdict == UNIQUE and rep.solution == u


def test_surd_resonance_exact():
    L = OperatorSpec.tri(c2="sqrt2", c3="-sqrt2")
    box = (3, 6, 6)
    f = CoefficientTensor(L.axes, box, {(1, 0, 0): 1})
    rep = resonance_scan(L, f)
    # sqrt2 (p - 2i - 1) = -j(j+1) only for j = 0 and p = 2i + 1
    assert rep.F == [(0, p, (p - 1) // 2) for p in (1, 3, 5)]
    out = solve(L, f)
    assert out.verdict == NON_UNIQUE
    assert out.solution[(1, 0, 0)] == pytest.approx(1 / (2 - math.sqrt(2)), rel=1e-15)


def test_interval_mode_reports_unresolved():
    L = OperatorSpec.tri(c2="sqrt2", c3="-sqrt2")
    f = CoefficientTensor(L.axes, (3, 6, 6), {(1, 0, 0): 1})
    rep = resonance_scan(L, f, resolution="interval", bits=32)
    assert rep.unresolved == [(0, p, (p - 1) // 2) for p in (1, 3, 5)]
    with pytest.raises(ResolutionInsufficient, match="resolution insufficient"):
        solve(L, f, resolution="interval", bits=32)


def test_box_beyond_truncation_rejected():
    L = OperatorSpec.tri()
    f = CoefficientTensor(L.axes, (2, 2, 2), {(0, 0, 0): 1})
    with pytest.raises(OperatorError):
        solve(L, f, box=(3, 2, 2))


def test_hypoellipticity_preserved():
    L = OperatorSpec.tri(c2=1, c3=1)
    axes = L.axes
    af = make_weight("gevrey", 200, s=1)
    from ultraspec.weights import AssociatedFunction
    M = AssociatedFunction(af)
    box = (24, 12, 12)
    f = CoefficientTensor(axes, box)
    for idx in product(*(range(b + 1) for b in box)):
        g = [ax.envelope_args(b)[i] for ax, b, i in zip(axes, box, idx)]
        f[idx] = math.exp(-sum(M.evaluate(1.0 * x).value for x in g))
    rep = solve(L, f, W=af)
    assert rep.hypoellipticity == PRESERVED
    assert rep.fits["solution"].classification == "test_function_like"


# -- Liouville -------------------------------------------------------------------

def test_liouville_sqrt2_bounded():
    rep = liouville_scan(1, "sqrt2", G1, (1, 2000), eps=[1.0])
    assert rep.verdict(1.0) == "bounded_on_box"
    assert min(rep.ratios(1.0)) >= 0.5
    # oracle: brute-force distance for the i = 0 corner
    assert rep.rows[0].min_distance <= abs(math.sqrt(2) * 1 - 1) + 1e-15


def test_liouville_adversarial_collapses():
    c3 = adversarial_c3(G1, (1, 2000))
    rep = liouville_scan(1, c3, G1, (1, 2000), eps=[1.0])
    assert rep.final(1.0) < 1e-6 and rep.verdict(1.0) == "collapsing"


def test_liouville_degenerate_and_conventions():
    rep = liouville_scan(1, 1, G1, (5, 5), eps=[1.0])
    assert rep.degenerate and rep.verdict(1.0) == "degenerate"
    with pytest.raises(ValueError):
        liouville_scan(1, 1, G1, (5, 5), convention="cubic")
    a = liouville_scan("1/3", "sqrt2", G1, (16, 16), eps=[0.5], n=2, convention="linear")
    b = liouville_scan("1/3", "sqrt2", G1, (16, 16), eps=[0.5], n=2, convention="root")
    assert b.final(0.5) >= a.final(0.5)
    assert "box_p" in a.to_csv().splitlines()[0]


@settings(max_examples=15, deadline=None)
@given(st.fractions(min_value=-5, max_value=5, max_denominator=30),
       st.sampled_from(["sqrt2", "sqrt3", "1/7", "-sqrt5"]),
       st.floats(0.1, 2.0))
def test_liouville_monotone_in_box(c2, c3, eps):
    rep = liouville_scan(c2, c3, G1, (20, 60), eps=[eps])
    t = rep.trend(eps)
    assert all(b <= a for a, b in zip(t, t[1:]))


# -- growth conditions -----------------------------------------------------------

def layout_tensor(sign, rates):
    from ultraspec.weights import AssociatedFunction
    axes = [BasisAxis.sphere(3), BasisAxis.laguerre(1), BasisAxis.hermite(1)]
    M = AssociatedFunction(G1)
    box = (15, 10, 10)
    t = CoefficientTensor(axes, box)
    for idx in product(*(range(b + 1) for b in box)):
        g = [ax.envelope_args(b)[i] for ax, b, i in zip(axes, box, idx)]
        t[idx] = math.exp(sign * sum(M.evaluate(h * x).value for h, x in zip(rates, g)))
    return t


def test_growth_conditions():
    grow = layout_tensor(+1, (1.0, 0.8, 1.2))
    v = assess_growth_conditions(grow, G1, "g1")
    assert v.holds and np.allclose(v.rates, (1.0, 0.8, 1.2), rtol=1e-6)
    assert not assess_growth_conditions(grow, G1, "g2").holds
    decay = layout_tensor(-1, (1.0, 0.8, 1.2))
    assert assess_growth_conditions(decay, G1, "g2").holds
    with pytest.raises(TensorError):
        assess_growth_conditions(decay.permute((1, 0, 2)), G1, "g1")
