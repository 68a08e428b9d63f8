import math
import time
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose
from scipy.special import sph_harm_y

from ultraspec.bases import (
    BasisAxis,
    BasisError,
    HorizonExceeded,
    SphereIndexer,
    eval_hermite,
    eval_laguerre,
    eval_sph_harm,
    laguerre_rayleigh,
    laplace_beltrami_fd,
    make_quadrature,
    oscillator_eigen_check,
    parse_axis,
    sph_harm_table,
    sphere_multiplicity,
)


def gram(axis, imax, order):
    nodes, w = axis.quadrature(order)
    tab = axis.basis_table(imax, nodes)
    return (tab * w) @ tab.T


@pytest.mark.parametrize("axis,imax,order", [
    (BasisAxis.laguerre(1), 20, 30),
    (BasisAxis.hermite(1), 20, 30),
    (BasisAxis.sphere(3), 80, 12),
    (BasisAxis.laguerre(2), 27, 16),
    (BasisAxis.hermite(2), 27, 16),
])
def test_gram_identity(axis, imax, order):
    G = gram(axis, imax, order)
    assert np.max(np.abs(G - np.eye(imax + 1))) <= 1e-10


def test_real_harmonics_against_complex():
    rng = np.random.default_rng(0)
    th, ph = rng.uniform(0.01, math.pi - 0.01, 50), rng.uniform(0, 2 * math.pi, 50)
    tab = sph_harm_table(6, th, ph)
    for j in range(7):
        for k in range(2 * j + 1):
            m = k - j
            Y = sph_harm_y(j, abs(m), th, ph)
            # undo the (-1)^m phase used by scipy
            Y = Y * (-1) ** abs(m)
            if m == 0:
                ref = Y.real
            elif m > 0:
                ref = math.sqrt(2) * Y.real
            else:
                ref = math.sqrt(2) * Y.imag
            assert_allclose(tab[j * j + k], ref, atol=1e-12)


def test_scalar_evaluators():
    assert_allclose(eval_laguerre(0, 2.0), math.exp(-1.0), rtol=1e-14)
    assert_allclose(eval_hermite(0, 0.0), math.pi ** -0.25, rtol=1e-14)
    assert_allclose(eval_sph_harm(0, 0, 0.3, 0.2), 1 / math.sqrt(4 * math.pi), rtol=1e-14)
    with pytest.raises(BasisError):
        eval_laguerre(1, -1.0)
    with pytest.raises(BasisError):
        eval_sph_harm(2, 5, 0.1, 0.1)


@pytest.mark.parametrize("k", range(11))
def test_laguerre_eigenrelation(k):
    assert abs(laguerre_rayleigh(k) - k) <= 1e-8


@pytest.mark.parametrize("i", range(11))
def test_oscillator_eigenvalues(i):
    lam, resid = oscillator_eigen_check(i)
    assert abs(lam - (2 * i + 1)) <= 1e-8 and resid <= 1e-8


@pytest.mark.parametrize("j,k", [(1, 0), (2, 3), (3, 6), (4, 1)])
def test_laplace_beltrami_on_harmonics(j, k):
    th = np.linspace(0.4, 2.6, 9)
    ph = np.linspace(0.1, 6.0, 9)

    def f(t, p):
        return eval_sph_harm(j, k, t, p)

    lb = laplace_beltrami_fd(f, th, ph)
    assert_allclose(-lb, j * (j + 1) * f(th, ph), atol=1e-4)


def test_sphere_multiplicities():
    assert [sphere_multiplicity(3, j) for j in range(5)] == [1, 3, 5, 7, 9]
    for n in (3, 4, 5, 6):
        S = SphereIndexer(n)
        for j in range(1, 30):
            assert S.bound_holds(j)
        for i in range(200):
            assert S.to_linear(*S.to_pair(i)) == i


def test_eigenvalues():
    assert BasisAxis.sphere(3).eigenvalues(8) == [0, 2, 2, 2, 6, 6, 6, 6, 6]
    assert BasisAxis.hermite(1).eigenvalues(3) == [1, 3, 5, 7]
    assert BasisAxis.laguerre(2).eigenvalues(5) == [0, 1, 1, 2, 2, 2]
    assert BasisAxis.sphere(4).eigenvalue(1) == 3


def test_abstract_axis():
    ax = BasisAxis.abstract(["0", "1/2", "3"], "A", order=2)
    assert ax.eigenvalue(1) == Fraction(1, 2) and ax.horizon == 2
    assert_allclose(ax.envelope_args(2), [0, math.sqrt(0.5), math.sqrt(3)])
    with pytest.raises(HorizonExceeded, match="horizon exceeded"):
        ax.eigenvalue(3)
    with pytest.raises(BasisError):
        BasisAxis.abstract(["-1", "2"])
    with pytest.raises(BasisError):
        ax.basis_table(1, [0.0])
    assert BasisAxis.from_dict(ax.to_dict()) == ax


def test_parse_axis():
    assert parse_axis("sphere") == BasisAxis.sphere(3)
    assert parse_axis("laguerre(2)") == BasisAxis.laguerre(2)
    with pytest.raises(BasisError):
        parse_axis("bessel(1)")


@given(st.integers(1, 40))
def test_quadrature_exactness(n):
    r = make_quadrature("laguerre", n)
    # int_0^inf y^k e^{-y} dy = k!
    for k in (0, n, 2 * n - 1):
        assert_allclose(np.sum(r.weights * r.nodes[:, 0] ** k), float(math.factorial(k)), rtol=1e-9)


def test_basis_fidelity_runtime():
    t0 = time.perf_counter()
    for axis, imax, order in [(BasisAxis.laguerre(1), 20, 30), (BasisAxis.hermite(1), 20, 30),
                              (BasisAxis.sphere(3), 80, 12)]:
        gram(axis, imax, order)
    assert time.perf_counter() - t0 < 10
