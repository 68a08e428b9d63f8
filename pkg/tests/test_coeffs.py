import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from ultraspec.bases import BasisAxis, BasisError
from ultraspec.coeffs import (
    DUAL_LIKE,
    TEST_FUNCTION_LIKE,
    CoefficientTensor,
    TailCertificate,
    TailNotCertified,
    TensorError,
    classify_decay,
    difference_coefficients,
    estimate_g_seminorm,
    expand,
    fit_derivative_bounds,
    g_seminorm_terms,
    hankel_clifford,
    polydisc_eval,
    reconstruct_coefficients,
    synthesize,
)
from ultraspec.weights import AssociatedFunction, make_weight

LAG, HER, SPH = BasisAxis.laguerre(1), BasisAxis.hermite(1), BasisAxis.sphere(3)
G1 = make_weight("gevrey", 200, s=1)


# -- tensor ----------------------------------------------------------------------

def test_tensor_basics_and_json(tmp_path):
    t = CoefficientTensor([LAG, HER], (3, 4), {(0, 0): Fraction(1, 3), (2, 4): 0.25,
                                               (1, 1): 1 + 2j, (3, 3): 0})
    assert t.nnz == 3 and (3, 3) not in t
    path = tmp_path / "t.json"
    t.save(path)
    u = CoefficientTensor.load(path)
    assert u == t and isinstance(u[(0, 0)], Fraction)
    with pytest.raises(TensorError):
        t[(4, 0)] = 1
    with pytest.raises(TensorError):
        t[(0,)] = 1
    with pytest.raises(TensorError):
        CoefficientTensor.from_json("{not json")


def test_threshold_drops_tiny_entries():
    t = CoefficientTensor([LAG], 5, {(1,): 1e-40, (2,): 1e-3})
    assert list(t.keys()) == [(2,)]


def test_abstract_axis_horizon_enforced():
    ax = BasisAxis.abstract(["0", "1", "2"])
    with pytest.raises(TensorError):
        CoefficientTensor([ax], 5)


@settings(max_examples=30, deadline=None)
@given(st.dictionaries(st.tuples(st.integers(0, 4), st.integers(0, 3), st.integers(0, 2)),
                       st.fractions(max_denominator=50).filter(lambda q: q != 0), max_size=12),
       st.permutations([0, 1, 2]))
def test_permute_is_relabelling(entries, order):
    t = CoefficientTensor([LAG, HER, SPH], (4, 3, 2), entries)
    u = t.permute(order)
    inv = [order.index(k) for k in range(3)]
    assert u.permute(inv) == t
    assert u.norm2_squared() == t.norm2_squared()


# -- expansion -------------------------------------------------------------------

def test_expand_exponential_against_laplace_transform():
    # int_0^inf e^{-y} L_k(y) e^{-y/2} dy = (s-1)^k / s^(k+1) at s = 3/2
    c = expand(lambda y: np.exp(-y), [LAG], 25)
    ref = np.array([0.5**k / 1.5 ** (k + 1) for k in range(26)])
    assert_allclose(c.to_dense(), ref, atol=1e-12)


def test_expand_hermite_and_sphere_basis_functions():
    c = expand(lambda x: math.pi ** -0.25 * np.exp(-x * x / 2), [HER], 10)
    assert_allclose(c.to_dense(), np.eye(11)[0], atol=1e-13)
    c = expand(lambda th, ph: np.cos(th), [SPH], 15)
    ref = np.zeros(16)
    ref[2] = math.sqrt(4 * math.pi / 3)
    assert_allclose(c.to_dense(), ref, atol=1e-13)


def test_expand_product_and_synthesize():
    axes = [SPH, LAG, HER]

    def f(th, ph, y, x):
        return (1 + np.sin(th) * np.cos(ph)) * np.exp(-y) * np.exp(-x * x)

    c = expand(f, axes, (8, 30, 30))
    rng = np.random.default_rng(1)
    pts = [np.column_stack([rng.uniform(0.2, 3, 5), rng.uniform(0, 6, 5)]),
           rng.uniform(0.1, 4, 5), rng.uniform(-2, 2, 5)]
    vals = synthesize(c, pts)
    ref = f(pts[0][:, 0], pts[0][:, 1], pts[1], pts[2])
    assert_allclose(vals, ref, atol=1e-8)


def test_expand_permutation_invariance():
    def f(y, x):
        return np.exp(-y - x * x / 2) * (1 + x)

    a = expand(f, [LAG, HER], (10, 12))
    b = expand(lambda x, y: f(y, x), [HER, LAG], (12, 10))
    assert_allclose(a.permute((1, 0)).to_dense(), b.to_dense(), atol=1e-15)


def test_expand_rejects_abstract_and_low_order():
    with pytest.raises(BasisError):
        expand(lambda y: y, [BasisAxis.abstract(["0", "1"])], 1)
    with pytest.raises(BasisError):
        expand(lambda y: y, [LAG], 10, order=5)


# -- decay classification --------------------------------------------------------

def envelope_tensor(axes, rates, trunc, W=G1, sign=-1, jitter=None):
    af = AssociatedFunction(W)
    args = [ax.envelope_args(t) for ax, t in zip(axes, trunc)]
    grids = np.meshgrid(*args, indexing="ij")
    logv = sum(sign * af.evaluate_many(h * g)[0] for h, g in zip(rates, grids))
    a = np.exp(logv)
    if jitter is not None:
        a = a * jitter(a.shape)
    return CoefficientTensor.from_dense(axes, a)


def test_decay_single_axis_rate():
    c = envelope_tensor([LAG], [2.0], [12])
    fit = classify_decay(c, G1)
    assert fit.classification == TEST_FUNCTION_LIKE
    assert_allclose(fit.rates[0], 2.0, rtol=1e-6)
    assert fit.residual <= 0 and "quantifier" in fit.caveat


def test_decay_two_axes():
    c = envelope_tensor([LAG, SPH], [1.5, 0.7], [15, 400])
    fit = classify_decay(c, G1)
    assert_allclose(fit.rates, [1.5, 0.7], rtol=1e-6)


def test_dual_like_growth():
    c = envelope_tensor([LAG], [1.0], [20], sign=+1)
    fit = classify_decay(c, G1)
    assert fit.classification == DUAL_LIKE
    assert_allclose(fit.growth_rates[0], 1.0, rtol=1e-6)


def test_single_entry_and_empty():
    fit = classify_decay(CoefficientTensor([LAG], 4, {(0,): 1.0}), G1)
    assert fit.C == 1.0 and math.isinf(fit.rates[0])
    with pytest.raises(TensorError):
        classify_decay(CoefficientTensor([LAG], 4), G1)


def test_decay_tolerates_sub_envelope_noise():
    rng = np.random.default_rng(3)
    def jitter(shape):
        j = rng.uniform(0.5, 1.0, shape)
        j[0] = 1.0  # the head anchors the constant
        return j

    c = envelope_tensor([HER], [1.0], [150], jitter=jitter)
    fit = classify_decay(c, G1)
    assert fit.classification == TEST_FUNCTION_LIKE and fit.rates[0] >= 0.9


# -- Hankel-Clifford -------------------------------------------------------------

def test_hankel_one_dimensional_signs():
    c = CoefficientTensor([LAG], 5, {(k,): Fraction(k + 1) for k in range(6)})
    out = hankel_clifford(c, [1])
    assert [out[(k,)] for k in range(6)] == [1, -2, 3, -4, 5, -6]


def test_hankel_multi_coordinate():
    ax = BasisAxis.laguerre(2)
    c = CoefficientTensor([ax, HER], (9, 1), {(p, 1): Fraction(1) for p in range(10)})
    out = hankel_clifford(c, [2])
    from ultraspec.indexing import linear_to_multi
    for p in range(10):
        assert out[(p, 1)] == (-1) ** linear_to_multi(2, p)[1]
    with pytest.raises(TensorError):
        hankel_clifford(c, [3])


def test_hankel_matches_quadrature_transform():
    # (Hf)(s) = 1/2 int J0(sqrt(s t)) f(t) dt maps l_k to (-1)^k l_k
    from scipy.integrate import quad
    from scipy.special import j0
    from ultraspec.bases import eval_laguerre
    for k in range(4):
        for s in (0.5, 2.0):
            v, _ = quad(lambda t: 0.5 * j0(math.sqrt(s * t)) * eval_laguerre(k, t), 1e-12, 80,
                        limit=400)
            assert_allclose(v, (-1) ** k * eval_laguerre(k, s), atol=1e-7)


# -- polydisc --------------------------------------------------------------------

def test_difference_coefficients_telescopes():
    a = np.arange(1.0, 7.0)
    b = difference_coefficients(a)
    assert_allclose(np.cumsum(b)[:-1], a)


def test_polydisc_value_closed_form():
    # a_m = r^m gives F(w) = (1 - w) / (1 - r w)
    r = 0.5
    c = CoefficientTensor.from_dense([LAG], r ** np.arange(80))
    w = 0.3 + 0.2j
    v = polydisc_eval(c, [w])
    assert_allclose(v.value, (1 - w) / (1 - r * w), rtol=1e-13)
    d = polydisc_eval(c, [w], [1])
    assert_allclose(d.value, (r - 1) / (1 - r * w) ** 2, rtol=1e-12)


def test_polydisc_tail_certification():
    c = envelope_tensor([LAG, LAG], [1.0, 1.0], [40, 40])
    with pytest.raises(TailNotCertified):
        polydisc_eval(c, [0.95, 0.1])
    cert = TailCertificate.from_fit(classify_decay(c, G1), G1)
    v = polydisc_eval(c, [0.95, 0.1], certificate=cert)
    assert v.certified and v.tail_bound < 1e-10
    with pytest.raises(TensorError):
        polydisc_eval(CoefficientTensor([HER], 3, {(0,): 1.0}), [0.1])


@pytest.mark.parametrize("h", [0.5, 1.0, 2.0])
def test_derivative_bounds_fit(h):
    W = make_weight("gevrey", 60, s=1)
    c = envelope_tensor([LAG], [h], [200], W)
    fit = fit_derivative_bounds(c, W, pmax=10, radius=0.9)
    assert math.isfinite(fit.c) and math.isfinite(fit.A)
    lm = W.log_values
    for (p,), s in fit.sups.items():
        assert s <= fit.c * fit.A**p * math.exp(lm[p]) * (1 + 1e-12)


def test_reconstruction_round_trip():
    a = 0.5 ** np.arange(33) / np.array([float(math.factorial(k)) for k in range(33)])
    c = CoefficientTensor.from_dense([LAG], a)

    def F(w):
        return (1 - w) * np.exp(w / 2)

    r = reconstruct_coefficients(F, 1, T=32)
    assert_allclose(r.to_dense(), a, atol=1e-14)
    assert classify_decay(r, G1).classification == TEST_FUNCTION_LIKE
    assert_allclose(polydisc_eval(c, [0.4]).value, F(0.4), rtol=1e-13)


# -- seminorm --------------------------------------------------------------------

def test_seminorm_terms_on_first_laguerre_function():
    # f = e^{-t/2}: ||t^{(p+k)/2} f^{(p)}||^2 = 4^{-p} (p+k)!
    c = CoefficientTensor([LAG], 3, {(0,): 1.0})
    terms = g_seminorm_terms(c, 6, 6)
    ref = np.array([[math.sqrt(4.0**-p * math.factorial(p + k)) for k in range(7)]
                    for p in range(7)])
    assert_allclose(terms, ref, rtol=1e-12)
    W = make_weight("gevrey", 20, s=1)
    est = estimate_g_seminorm(c, 2.0, W, 6, 6)
    assert_allclose(est, np.max(ref / 2.0 ** (np.add.outer(np.arange(7), np.arange(7)))
                                / np.sqrt(np.multiply.outer(W.values[:7], W.values[:7]))),
                    rtol=1e-12)
    with pytest.raises(TensorError):
        g_seminorm_terms(c, 11, 0)
