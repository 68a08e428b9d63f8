"""Orthonormal eigenbases, their eigenvalues and quadrature rules.

Axis kinds
----------
``laguerre(n)``
    ``prod_l L_{m_l}(y_l) exp(-y_l/2)`` on ``(0, inf)^n``; eigenvalue ``|m|``.
``hermite(m)``
    Normalised Hermite functions on ``R^m``; eigenvalue ``2|a| + m`` of the
    harmonic oscillator ``-Laplacian + |x|^2``.
``sphere(n1)``
    Real spherical harmonics on ``S^{n1-1}``; eigenvalue ``j(j + n1 - 2)``.
    Numerical evaluation only for ``n1 = 3``.
``abstract``
    A user-supplied nondecreasing table of nonnegative rationals.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb

import numpy as np
from scipy.special import roots_hermite, roots_laguerre, roots_legendre

from . import kernels
from .indexing import laguerre_nu, laguerre_nu_array, linear_to_multi

KINDS = ("laguerre", "hermite", "sphere", "abstract")


class BasisError(ValueError):
    """Unsupported axis or evaluation request."""


class HorizonExceeded(BasisError):
    """Index beyond the eigenvalue table of an abstract axis."""


# ---------------------------------------------------------------------------
# one-dimensional families
# ---------------------------------------------------------------------------


def laguerre_functions(kmax, y):
    """Rows ``k = 0..kmax`` of ``L_k(y) exp(-y/2)``."""
    return kernels.laguerre_table(int(kmax), np.asarray(y, dtype=float))


def hermite_functions(imax, x):
    """Rows ``i = 0..imax`` of the L2-normalised Hermite functions."""
    return kernels.hermite_table(int(imax), np.asarray(x, dtype=float))


def eval_laguerre(k, y):
    """``L_k(y) exp(-y/2)`` for ``y > 0``."""
    y = np.asarray(y, dtype=float)
    if k < 0:
        raise BasisError("degree must be nonnegative")
    if np.any(y <= 0):
        raise BasisError("Laguerre functions are evaluated at y > 0")
    out = laguerre_functions(k, y.ravel())[k]
    return out.reshape(y.shape) if y.ndim else float(out[0])


def eval_hermite(i, x):
    """Normalised Hermite function ``h_i(x)``."""
    if i < 0:
        raise BasisError("degree must be nonnegative")
    x = np.asarray(x, dtype=float)
    out = hermite_functions(i, x.ravel())[i]
    return out.reshape(x.shape) if x.ndim else float(out[0])


def sph_harm_table(jmax, theta, phi):
    """Real orthonormal spherical harmonics on ``S^2``.

    Row ``j*j + k`` holds degree ``j``, order ``m = k - j``: ``m < 0`` uses
    ``sin(|m| phi)``, ``m > 0`` uses ``cos(m phi)``. No Condon-Shortley phase.
    """
    theta = np.asarray(theta, dtype=float).ravel()
    phi = np.asarray(phi, dtype=float).ravel()
    ct, st = np.cos(theta), np.sin(theta)
    out = np.empty(((jmax + 1) ** 2, theta.size))
    # pbar[m] tracks the fully normalised P_l^m for the current column m
    pmm = np.full(theta.size, 1.0 / math.sqrt(4.0 * math.pi))
    for m in range(jmax + 1):
        if m > 0:
            pmm = math.sqrt((2 * m + 1) / (2.0 * m)) * st * pmm
        if m == 0:
            cs = None
        else:
            cs = (math.sqrt(2.0) * np.cos(m * phi), math.sqrt(2.0) * np.sin(m * phi))
        prev2, prev1 = None, pmm
        for l in range(m, jmax + 1):
            if l == m:
                cur = pmm
            elif l == m + 1:
                cur = math.sqrt(2 * m + 3) * ct * pmm
            else:
                a = math.sqrt((4.0 * l * l - 1) / (l * l - m * m))
                b = math.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1) ** 2 - 1))
                cur = a * (ct * prev1 - b * prev2)
            if l > m:
                prev2, prev1 = prev1, cur
            if m == 0:
                out[l * l + l] = cur
            else:
                out[l * l + l + m] = cur * cs[0]
                out[l * l + l - m] = cur * cs[1]
    return out


def eval_sph_harm(j, k, theta, phi):
    """Real spherical harmonic of degree ``j`` and order index ``0 <= k <= 2j``."""
    if not 0 <= k <= 2 * j:
        raise BasisError(f"order index {k} outside [0, {2 * j}]")
    scalar = np.ndim(theta) == 0 and np.ndim(phi) == 0
    th, ph = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    out = sph_harm_table(j, th, ph)[j * j + k].reshape(th.shape)
    return float(out) if scalar else out


def sphere_multiplicity(n1, j):
    """Dimension ``N_j`` of degree-``j`` harmonics on ``S^{n1-1}``."""
    if n1 < 2:
        raise BasisError("sphere ambient dimension must be at least 2")
    if j < 0:
        return 0
    return comb(j + n1 - 1, n1 - 1) - (comb(j + n1 - 3, n1 - 1) if j >= 2 else 0)


def sphere_cumulative(n1, j):
    """``sum_{i <= j} N_i``."""
    if j < 0:
        return 0
    return comb(j + n1 - 1, n1 - 1) + (comb(j + n1 - 2, n1 - 1) if j >= 1 else 0)


class SphereIndexer:
    """Degree-major linearisation of the pairs ``(j, k)``, ``0 <= k < N_j``."""

    def __init__(self, n1):
        if n1 < 3:
            raise BasisError("sphere axes need n1 >= 3")
        self.n1 = n1

    def multiplicity(self, j):
        return sphere_multiplicity(self.n1, j)

    def to_linear(self, j, k):
        if not 0 <= k < self.multiplicity(j):
            raise BasisError(f"order index {k} outside [0, N_{j})")
        return sphere_cumulative(self.n1, j - 1) + k

    def to_pair(self, i):
        if i < 0:
            raise BasisError("linear index must be nonnegative")
        if self.n1 == 3:
            j = math.isqrt(i)
            return j, i - j * j
        j = 0
        while sphere_cumulative(self.n1, j) <= i:
            j += 1
        return j, i - sphere_cumulative(self.n1, j - 1)

    def degree_array(self, imax):
        if self.n1 == 3:
            return np.floor(np.sqrt(np.arange(imax + 1) + 0.5)).astype(np.int64)
        jmax = self.to_pair(imax)[0]
        counts = [self.multiplicity(j) for j in range(jmax + 1)]
        return np.repeat(np.arange(jmax + 1, dtype=np.int64), counts)[: imax + 1]

    def bound_holds(self, j):
        """``2 j^{n-2}/(n-2)! < N_j <= n j^{n-2}`` for ``j >= 1``."""
        n = self.n1
        nj = self.multiplicity(j)
        return Fraction(2 * j ** (n - 2), math.factorial(n - 2)) < nj <= n * j ** (n - 2)


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and weights against the rule's weight function.

    ``fweights`` integrate plain functions: ``sum fweights * f(nodes)``
    approximates the unweighted integral (Lebesgue measure, or surface
    measure for the sphere).
    """

    kind: str
    order: int
    nodes: np.ndarray
    weights: np.ndarray
    fweights: np.ndarray
    degree: int

    def to_dict(self):
        return {
            "kind": self.kind,
            "order": self.order,
            "degree": self.degree,
            "nodes": self.nodes.tolist(),
            "weights": self.weights.tolist(),
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


@lru_cache(maxsize=64)
def make_quadrature(kind, order):
    """Gauss rule for ``kind`` in {'laguerre', 'hermite', 'legendre', 'sphere'}.

    Laguerre and Hermite rules are exact for polynomials of degree
    ``2*order - 1`` against ``exp(-y)`` and ``exp(-x^2)``. The sphere rule is
    Gauss-Legendre in ``cos(theta)`` times ``2*order`` uniform ``phi`` points
    and integrates harmonics of total degree ``<= 2*order - 1`` exactly.
    """
    order = int(order)
    if order < 1:
        raise BasisError("quadrature order must be at least 1")
    if kind == "laguerre":
        x, w = roots_laguerre(order)
        with np.errstate(over="ignore", under="ignore"):
            fw = np.exp(np.log(w) + x)
        nodes = x[:, None]
    elif kind == "hermite":
        x, w = roots_hermite(order)
        with np.errstate(over="ignore", under="ignore"):
            fw = np.exp(np.log(w) + x * x)
        nodes = x[:, None]
    elif kind == "legendre":
        x, w = roots_legendre(order)
        fw = w
        nodes = x[:, None]
    elif kind == "sphere":
        z, wz = roots_legendre(order)
        nphi = 2 * order
        ph = 2.0 * math.pi * np.arange(nphi) / nphi
        th = np.arccos(z)
        T, P = np.meshgrid(th, ph, indexing="ij")
        nodes = np.column_stack([T.ravel(), P.ravel()])
        w = np.repeat(wz, nphi) * (2.0 * math.pi / nphi)
        fw = w
    else:
        raise BasisError(f"unsupported quadrature kind {kind!r}")
    for a in (nodes, w, fw):
        a.setflags(write=False)
    return QuadratureRule(kind, order, nodes, w, fw, 2 * order - 1)


def tensor_rule(rule, dim):
    """``dim``-fold tensor product of a one-dimensional rule."""
    if dim == 1:
        return rule.nodes, rule.weights, rule.fweights
    x = rule.nodes[:, 0]
    grids = np.meshgrid(*([x] * dim), indexing="ij")
    nodes = np.column_stack([g.ravel() for g in grids])
    w = rule.weights
    fw = rule.fweights
    W, FW = w, fw
    for _ in range(dim - 1):
        W = np.multiply.outer(W, w).ravel()
        FW = np.multiply.outer(FW, fw).ravel()
    return nodes, W, FW


# ---------------------------------------------------------------------------
# axes
# ---------------------------------------------------------------------------


def _as_fraction(v):
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float):
        return Fraction(v).limit_denominator(10**12) if not v.is_integer() else Fraction(int(v))
    return Fraction(v)


@dataclass(frozen=True)
class BasisAxis:
    """One tensor factor of an expansion.

    Attributes
    ----------
    kind : str
    dim : int
        ``n`` for laguerre, ``m`` for hermite, ``n1`` for sphere, 1 for abstract.
    name : str
    table : tuple of Fraction
        Eigenvalues of an abstract axis.
    order : Fraction
        For abstract axes the envelope argument is ``lambda**(1/order)``.
    """

    kind: str
    dim: int = 1
    name: str = ""
    table: tuple = field(default=(), compare=True)
    order: Fraction = Fraction(1)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise BasisError(f"unknown axis kind {self.kind!r}")
        if self.kind == "sphere" and self.dim < 3:
            raise BasisError("sphere axes need n1 >= 3")
        if self.dim < 1:
            raise BasisError("axis dimension must be at least 1")
        if self.kind == "abstract":
            tab = tuple(_as_fraction(v) for v in self.table)
            if not tab:
                raise BasisError("abstract axis needs a nonempty eigenvalue table")
            if any(v < 0 for v in tab):
                raise BasisError("eigenvalue tables must be nonnegative")
            if any(b < a for a, b in zip(tab, tab[1:])):
                raise BasisError("eigenvalue tables must be nondecreasing")
            object.__setattr__(self, "table", tab)
            if _as_fraction(self.order) <= 0:
                raise BasisError("operator order must be positive")
        object.__setattr__(self, "order", _as_fraction(self.order))

    # -- construction helpers -------------------------------------------------
    @classmethod
    def laguerre(cls, n=1):
        return cls("laguerre", int(n))

    @classmethod
    def hermite(cls, m=1):
        return cls("hermite", int(m))

    @classmethod
    def sphere(cls, n1=3):
        return cls("sphere", int(n1))

    @classmethod
    def abstract(cls, values, name="abstract", order=1):
        return cls("abstract", 1, name, tuple(values), _as_fraction(order))

    # -- descriptors ----------------------------------------------------------
    @property
    def label(self):
        if self.kind == "abstract":
            return f"abstract({self.name})"
        return f"{self.kind}({self.dim})"

    @property
    def numerical(self):
        return self.kind in ("laguerre", "hermite") or (self.kind == "sphere" and self.dim == 3)

    @property
    def point_dim(self):
        if self.kind == "sphere":
            return 2
        return self.dim

    @property
    def horizon(self):
        """Largest admissible linear index (``None`` when unbounded)."""
        return len(self.table) - 1 if self.kind == "abstract" else None

    def _check_index(self, i):
        if i < 0:
            raise BasisError("linear index must be nonnegative")
        if self.kind == "abstract" and i >= len(self.table):
            raise HorizonExceeded(
                f"horizon exceeded: index {i} beyond table of length {len(self.table)}")

    def multi_index(self, i):
        """Coordinate representation of linear index ``i``."""
        self._check_index(i)
        if self.kind in ("laguerre", "hermite"):
            return linear_to_multi(self.dim, i)
        if self.kind == "sphere":
            return SphereIndexer(self.dim).to_pair(i)
        return (i,)

    # -- spectrum -------------------------------------------------------------
    def eigenvalue(self, i):
        """Exact eigenvalue at linear index ``i``."""
        self._check_index(i)
        if self.kind == "laguerre":
            return Fraction(laguerre_nu(self.dim, i))
        if self.kind == "hermite":
            return Fraction(2 * laguerre_nu(self.dim, i) + self.dim)
        if self.kind == "sphere":
            j = SphereIndexer(self.dim).to_pair(i)[0]
            return Fraction(j * (j + self.dim - 2))
        return self.table[i]

    def eigenvalues(self, imax):
        """Exact eigenvalues for indices ``0..imax`` as a list of Fractions."""
        self._check_index(imax)
        if self.kind == "abstract":
            return list(self.table[: imax + 1])
        return [Fraction(int(v)) for v in self.eigenvalues_int(imax)]

    def eigenvalues_int(self, imax):
        """Integer eigenvalues ``0..imax`` (not available for abstract axes)."""
        if self.kind == "laguerre":
            return laguerre_nu_array(self.dim, imax)
        if self.kind == "hermite":
            return 2 * laguerre_nu_array(self.dim, imax) + self.dim
        if self.kind == "sphere":
            j = SphereIndexer(self.dim).degree_array(imax)
            return j * (j + self.dim - 2)
        raise BasisError("abstract axes have rational eigenvalues")

    def degrees(self, imax):
        """Grading used by the envelope: ``|m|``, ``|a|`` or ``j``."""
        if self.kind in ("laguerre", "hermite"):
            return laguerre_nu_array(self.dim, imax)
        if self.kind == "sphere":
            return SphereIndexer(self.dim).degree_array(imax)
        return np.arange(imax + 1)

    def envelope_args(self, imax):
        """Argument ``g(i)`` of the envelope ``exp(-M(h g(i)))`` for ``i <= imax``.

        sphere: degree ``j``; laguerre: ``p^{1/n}``; hermite: ``mu^{1/2}``;
        abstract: ``lambda^{1/order}``.
        """
        self._check_index(imax)
        i = np.arange(imax + 1, dtype=float)
        if self.kind == "sphere":
            return SphereIndexer(self.dim).degree_array(imax).astype(float)
        if self.kind == "laguerre":
            return i ** (1.0 / self.dim)
        if self.kind == "hermite":
            return np.sqrt(self.eigenvalues_int(imax).astype(float))
        lam = np.array([float(v) for v in self.table[: imax + 1]])
        return lam ** (1.0 / float(self.order))

    # -- numerics -------------------------------------------------------------
    def _require_numerical(self):
        if not self.numerical:
            raise BasisError(f"{self.label} is an abstract-axis only; no numerical evaluator")

    def basis_table(self, imax, points):
        """Basis functions ``0..imax`` at ``points`` (shape ``(npts, point_dim)``)."""
        self._require_numerical()
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None] if self.point_dim == 1 else pts[None, :]
        if pts.shape[1] != self.point_dim:
            raise BasisError(f"{self.label} expects points of dimension {self.point_dim}")
        if self.kind == "sphere":
            jmax = math.isqrt(imax)
            return sph_harm_table(jmax, pts[:, 0], pts[:, 1])[: imax + 1]
        tmax = laguerre_nu(self.dim, imax)
        fn = laguerre_functions if self.kind == "laguerre" else hermite_functions
        tabs = [fn(tmax, pts[:, c]) for c in range(self.dim)]
        if self.dim == 1:
            return tabs[0][: imax + 1]
        out = np.empty((imax + 1, pts.shape[0]))
        for i in range(imax + 1):
            m = linear_to_multi(self.dim, i)
            row = tabs[0][m[0]].copy()
            for c in range(1, self.dim):
                row *= tabs[c][m[c]]
            out[i] = row
        return out

    def quadrature(self, order):
        """Nodes and plain-integration weights on this axis."""
        self._require_numerical()
        if self.kind == "sphere":
            r = make_quadrature("sphere", order)
            return r.nodes, r.fweights
        r = make_quadrature(self.kind, order)
        nodes, _, fw = tensor_rule(r, self.dim)
        return nodes, fw

    def max_degree(self, imax):
        """Largest one-dimensional degree needed for indices ``<= imax``."""
        if self.kind == "sphere":
            return SphereIndexer(self.dim).to_pair(imax)[0]
        if self.kind in ("laguerre", "hermite"):
            return laguerre_nu(self.dim, imax)
        return imax

    # -- serialisation --------------------------------------------------------
    def to_dict(self):
        d = {"kind": self.kind, "dim": self.dim}
        if self.kind == "abstract":
            d["name"] = self.name
            d["table"] = [str(v) for v in self.table]
            d["order"] = str(self.order)
        return d

    @classmethod
    def from_dict(cls, d):
        if isinstance(d, str):
            return parse_axis(d)
        kind = d["kind"]
        if kind == "abstract":
            tab = d.get("table")
            if tab is None and "table_file" in d:
                tab = load_eigenvalue_table(d["table_file"])
            return cls.abstract(tab, d.get("name", "abstract"), Fraction(d.get("order", "1")))
        return cls(kind, int(d.get("dim", 3 if kind == "sphere" else 1)))


def parse_axis(text):
    """Parse ``'laguerre(2)'``, ``'hermite'``, ``'sphere(3)'``."""
    text = text.strip()
    if "(" in text:
        kind, arg = text[:-1].split("(", 1)
        dim = int(arg)
    else:
        kind, dim = text, None
    if kind not in ("laguerre", "hermite", "sphere"):
        raise BasisError(f"cannot parse axis {text!r}")
    if dim is None:
        dim = 3 if kind == "sphere" else 1
    return BasisAxis(kind, dim)


def load_eigenvalue_table(path):
    """Read a JSON array of rational strings."""
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, list):
        raise BasisError("eigenvalue table must be a JSON array")
    return [Fraction(str(v)) for v in data]


def axis_eigenvalue(axis, i):
    """Exact eigenvalue of ``axis`` at linear index ``i``."""
    return axis.eigenvalue(i)


# ---------------------------------------------------------------------------
# operator checks
# ---------------------------------------------------------------------------


def laguerre_poly(k):
    """Coefficients (ascending, Fractions) of the Laguerre polynomial ``L_k``."""
    return [Fraction((-1) ** i * comb(k, i), math.factorial(i)) for i in range(k + 1)]


def _pderiv(c):
    return [i * c[i] for i in range(1, len(c))] or [Fraction(0)]


def laguerre_operator_poly(c):
    """Polynomial ``q`` with ``E(p e^{-y/2}) = q e^{-y/2}`` for ``p`` given by ``c``.

    ``E = -(y d^2/dy^2 + d/dy - y/4 + 1/2)`` reduces to
    ``q = -(y p'' + (1 - y) p')``.
    """
    d1 = _pderiv(c)
    d2 = _pderiv(d1)
    q = [Fraction(0)] * (len(c) + 1)
    for i, v in enumerate(d2):
        q[i + 1] -= v
    for i, v in enumerate(d1):
        q[i] -= v
        q[i + 1] += v
    return q


def laguerre_rayleigh(k, order=None):
    """``<E l_k, l_k>`` by exact differentiation and Gauss-Laguerre quadrature."""
    p = laguerre_poly(k)
    q = laguerre_operator_poly(p)
    r = make_quadrature("laguerre", order or k + 2)
    y = r.nodes[:, 0]
    qv = np.polynomial.polynomial.polyval(y, [float(v) for v in q])
    pv = np.polynomial.polynomial.polyval(y, [float(v) for v in p])
    return float(np.sum(r.weights * qv * pv))


def hermite_derivative_matrix(n):
    """Coefficient-space ``d/dx`` on ``h_0..h_{n-1}`` into ``h_0..h_n``."""
    D = np.zeros((n + 1, n))
    for j in range(n):
        if j > 0:
            D[j - 1, j] = math.sqrt(j / 2.0)
        D[j + 1, j] = -math.sqrt((j + 1) / 2.0)
    return D


def hermite_position_matrix(n):
    """Coefficient-space multiplication by ``x`` on ``h_0..h_{n-1}``."""
    X = np.zeros((n + 1, n))
    for j in range(n):
        if j > 0:
            X[j - 1, j] = math.sqrt(j / 2.0)
        X[j + 1, j] = math.sqrt((j + 1) / 2.0)
    return X


def oscillator_apply(c):
    """Coefficients of ``(-d^2/dx^2 + x^2) f`` where ``f = sum c_i h_i``."""
    c = np.asarray(c, dtype=float)
    n = c.size
    D1, D2 = hermite_derivative_matrix(n), hermite_derivative_matrix(n + 1)
    X1, X2 = hermite_position_matrix(n), hermite_position_matrix(n + 1)
    return -(D2 @ (D1 @ c)) + X2 @ (X1 @ c)


def oscillator_eigen_check(i, order=None):
    """Rayleigh quotient and quadrature-norm residual of the oscillator on ``h_i``."""
    c = np.zeros(i + 1)
    c[i] = 1.0
    hc = oscillator_apply(c)
    r = make_quadrature("hermite", order or i + 10)
    x = r.nodes[:, 0]
    tab = hermite_functions(hc.size - 1, x)
    val = hc @ tab
    hi = tab[i]
    lam = float(np.sum(r.fweights * val * hi))
    resid = float(np.sqrt(np.sum(r.fweights * (val - lam * hi) ** 2)))
    return lam, resid


def laplace_beltrami_fd(f, theta, phi, step=1e-3):
    """Central-difference Laplace-Beltrami of ``f(theta, phi)`` on ``S^2``."""
    h = step
    f0 = f(theta, phi)
    ftt = (f(theta + h, phi) - 2 * f0 + f(theta - h, phi)) / h**2
    ft = (f(theta + h, phi) - f(theta - h, phi)) / (2 * h)
    fpp = (f(theta, phi + h) - 2 * f0 + f(theta, phi - h)) / h**2
    return ftt + np.cos(theta) / np.sin(theta) * ft + fpp / np.sin(theta) ** 2
