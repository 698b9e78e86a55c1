"""Composition expansions, leading parts of powers, and ellipticity checks."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import expr as ex
from .errors import BranchError, DomainError, MissingComponentError
from .quadrature import sample_sphere
from .symbol import (
    ONE_COMPONENT, ZERO_COMPONENT, Component, OrderPair, PrincipalTriple,
    SGClassicalSymbol, to_fraction,
)

__all__ = [
    "Sector", "EllipticityReport", "leibniz_corner", "leibniz_psi", "leibniz_e",
    "compose", "power_leading_triple", "check_ellipticity",
    "check_lambda_ellipticity", "make_triple", "triple_samples",
]

ZERO_TOL = 1e-12
ARG_TOL = 1e-12


@dataclass(frozen=True)
class Sector:
    """Closed sector ``{z : theta0 - theta <= arg z <= theta0 + theta}``."""

    theta0: float
    theta: float

    def __post_init__(self):
        if not 0.0 < self.theta < math.pi:
            raise ValueError("sector half-aperture must lie in (0, pi)")

    def _offset(self, v):
        return np.mod(np.angle(v) - self.theta0 + np.pi, 2 * np.pi) - np.pi

    def contains(self, v, tol: float = ARG_TOL):
        v = np.asarray(v, dtype=complex)
        return (np.abs(v) < ZERO_TOL) | (np.abs(self._offset(v)) <= self.theta + tol)

    def distance(self, v):
        """Euclidean distance from ``v`` to the sector."""
        v = np.asarray(v, dtype=complex)
        inside = self.contains(v, tol=0.0)
        best = np.full(v.shape, np.inf)
        for phi in (self.theta0 - self.theta, self.theta0 + self.theta):
            u = np.exp(1j * phi)
            proj = np.maximum((v * np.conj(u)).real, 0.0)
            best = np.minimum(best, np.abs(v - proj * u))
        out = np.where(inside, 0.0, best)
        return out


@dataclass
class EllipticityReport:
    verdict: str  # "certified-fail" or "sample-pass"
    margin: float
    witness: dict | None = None
    samples: int = 0
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.verdict == "sample-pass"

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "margin": self.margin,
                "witness": self.witness, "samples": self.samples, "notes": list(self.notes)}


def make_triple(n: int, order, sigma_psi, sigma_e, sigma_psie) -> PrincipalTriple:
    """Build a :class:`PrincipalTriple` from expressions."""
    order = order if isinstance(order, OrderPair) else OrderPair(*order)
    return PrincipalTriple(Component.of(sigma_psi, n), Component.of(sigma_e, n),
                           Component.of(sigma_psie, n), n, order)


# -- composition ------------------------------------------------------------------

def _multi_indices(n: int, total: int):
    """All alpha in N^n with |alpha| = total."""
    for cut in itertools.combinations(range(total + n - 1), n - 1):
        prev = -1
        alpha = []
        for c in cut + (total + n - 1,):
            alpha.append(c - prev - 1)
            prev = c
        yield tuple(alpha)


class _DerivCache:
    def __init__(self):
        self.store = {}

    def get(self, c: Component, side: str, alpha: tuple) -> Component:
        key = (c, side, alpha)
        if key not in self.store:
            out = c
            for i, a in enumerate(alpha):
                for _ in range(a):
                    out = out.differentiate(ex.Var(side, i + 1))
            self.store[key] = out
        return self.store[key]


def _term(a_c, b_c, alpha, cache):
    """(1/alpha!) d_xi^alpha a * D_x^alpha b with D_x = -i d_x."""
    if a_c.is_zero or b_c.is_zero:
        return None
    da = cache.get(a_c, ex.XI, alpha)
    if da.is_zero:
        return None
    db = cache.get(b_c, ex.X, alpha)
    if db.is_zero:
        return None
    order = sum(alpha)
    coef = (-1j) ** order / math.prod(math.factorial(k) for k in alpha)
    return (da * db).scale(coef)


def _accumulate(terms):
    total = ZERO_COMPONENT
    for t in terms:
        if t is not None:
            total = total + t
    return total


def leibniz_corner(a: SGClassicalSymbol, b: SGClassicalSymbol, j: int, k: int,
                   _cache: _DerivCache | None = None) -> Component:
    """Bi-homogeneous component ``(j, k)`` of the composition ``a # b``.

    Sums ``(1/alpha!) d_xi^alpha a_(i1,k1) D_x^alpha b_(i2,k2)`` over
    ``i1 + i2 + |alpha| = j`` and ``k1 + k2 + |alpha| = k``.

    Raises
    ------
    MissingComponentError
        If a needed component lies beyond the depth of ``a`` or ``b``.
    """
    _same_dim(a, b)
    cache = _cache or _DerivCache()
    terms = []
    for order in range(min(j, k) + 1):
        for alpha in _multi_indices(a.n, order):
            for i1 in range(j - order + 1):
                i2 = j - order - i1
                for k1 in range(k - order + 1):
                    k2 = k - order - k1
                    terms.append(_term(a.corner_component(i1, k1),
                                       b.corner_component(i2, k2), alpha, cache))
    return _accumulate(terms)


def leibniz_psi(a: SGClassicalSymbol, b: SGClassicalSymbol, j: int,
                _cache: _DerivCache | None = None) -> Component:
    """xi-homogeneous component ``j`` of ``a # b``."""
    _same_dim(a, b)
    cache = _cache or _DerivCache()
    terms = []
    for order in range(j + 1):
        for alpha in _multi_indices(a.n, order):
            for i1 in range(j - order + 1):
                terms.append(_term(a.psi_component(i1), b.psi_component(j - order - i1),
                                   alpha, cache))
    return _accumulate(terms)


def leibniz_e(a: SGClassicalSymbol, b: SGClassicalSymbol, k: int,
              _cache: _DerivCache | None = None) -> Component:
    """x-homogeneous component ``k`` of ``a # b``."""
    _same_dim(a, b)
    cache = _cache or _DerivCache()
    terms = []
    for order in range(k + 1):
        for alpha in _multi_indices(a.n, order):
            for k1 in range(k - order + 1):
                terms.append(_term(a.e_component(k1), b.e_component(k - order - k1),
                                   alpha, cache))
    return _accumulate(terms)


def _same_dim(a, b):
    if a.n != b.n:
        raise ValueError("symbols live in different dimensions")


def compose(a: SGClassicalSymbol, b: SGClassicalSymbol, depths=None) -> SGClassicalSymbol:
    """Expansion data of the composition ``a # b``.

    Depths default to the smallest depths of the factors, the largest for
    which every needed component is available.
    """
    _same_dim(a, b)
    P = min(a.P, b.P) if depths is None else depths[0]
    Q = min(a.Q, b.Q) if depths is None else depths[1]
    cache = _DerivCache()
    psi = {j: leibniz_psi(a, b, j, cache) for j in range(P)}
    e = {k: leibniz_e(a, b, k, cache) for k in range(Q)}
    corner = {(j, k): leibniz_corner(a, b, j, k, cache) for j in range(P) for k in range(Q)}
    drop = (lambda m: {key: c for key, c in m.items() if not c.is_zero})
    return SGClassicalSymbol(a.n, a.order + b.order, drop(psi), drop(e), drop(corner),
                             (P, Q), None, a.excision, f"({a.name})#({b.name})")


# -- sampling of the triple -----------------------------------------------------

def _radial_grid(count: int = 32) -> np.ndarray:
    t = np.arange(count) / count
    t = np.append(t, 1.0 - 2.0 ** -12)
    return t / (1.0 - t)


def triple_samples(n: int, grid_level: int = 256, radial: int = 32):
    """Deterministic sample sets for the three triple elements.

    Returns a dict name -> (x, xi) with arrays of shape (M, n): sigma_psi
    on x-grid x unit xi-sphere, sigma_e on unit x-sphere x xi-grid,
    sigma_psie on the bi-sphere.
    """
    S = sample_sphere(n, grid_level)
    r = _radial_grid(radial)
    grid = (r[:, None, None] * S[None, :, :]).reshape(-1, n)
    grid = np.unique(np.round(grid, 15), axis=0)

    def product(A, B):
        ia, ib = np.meshgrid(np.arange(len(A)), np.arange(len(B)), indexing="ij")
        return A[ia.ravel()], B[ib.ravel()]

    return {
        "sigma_psi": product(grid, S),
        "sigma_e": product(S, grid),
        "sigma_psie": product(S, S),
    }


def _values(c: Component, x: np.ndarray, xi: np.ndarray, chunk: int = 1 << 18):
    out = np.empty(len(x), dtype=complex)
    for s in range(0, len(x), chunk):
        xs, xis = x[s:s + chunk], xi[s:s + chunk]
        v = c.evaluate(tuple(xs.T), tuple(xis.T))
        out[s:s + chunk] = np.broadcast_to(v, (len(xs),))
    return out


def _weights(name, x, xi, order: OrderPair):
    if name == "sigma_psi":
        return (1.0 + np.sum(x * x, axis=1)) ** (-float(order.m2) / 2)
    if name == "sigma_e":
        return (1.0 + np.sum(xi * xi, axis=1)) ** (-float(order.m1) / 2)
    return np.ones(len(x))


def _components(t: PrincipalTriple):
    return (("sigma_psi", t.sigma_psi), ("sigma_e", t.sigma_e), ("sigma_psie", t.sigma_psie))


def _witness(name, x, xi, i, lam=None):
    w = {"component": name, "x": x[i].tolist(), "xi": xi[i].tolist()}
    if lam is not None:
        w["lambda"] = [float(np.real(lam)), float(np.imag(lam))]
    return w


def check_ellipticity(t: PrincipalTriple, grid_level: int = 256) -> EllipticityReport:
    """Sampled SG-ellipticity test of a principal triple.

    A sample with ``|value| < 1e-12`` certifies failure. Otherwise the
    verdict is ``sample-pass`` with margin equal to the smallest weighted
    modulus (``<x>^{-m2}`` for sigma_psi, ``<xi>^{-m1}`` for sigma_e).
    """
    samples = triple_samples(t.n, grid_level)
    margin = np.inf
    total = 0
    for name, c in _components(t):
        x, xi = samples[name]
        total += len(x)
        try:
            v = _values(c, x, xi)
        except DomainError as exc:
            return EllipticityReport("certified-fail", 0.0, {"component": name, "error": str(exc)},
                                     total, [f"{name} is not evaluable on its domain"])
        a = np.abs(v)
        if not np.all(np.isfinite(a)):
            i = int(np.argmax(~np.isfinite(a)))
            return EllipticityReport("certified-fail", 0.0, _witness(name, x, xi, i), total,
                                     [f"{name} is not finite"])
        i = int(np.argmin(a))
        if a[i] < ZERO_TOL:
            return EllipticityReport("certified-fail", float(a[i]), _witness(name, x, xi, i),
                                     total, [f"{name} vanishes"])
        margin = min(margin, float(np.min(a * _weights(name, x, xi, t.order))))
    return EllipticityReport("sample-pass", margin, None, total)


def check_lambda_ellipticity(t: PrincipalTriple, sector: Sector,
                             grid_level: int = 256) -> EllipticityReport:
    """Sampled test that no triple element takes values in the sector.

    For each element, ``c - lambda`` vanishes for some ``lambda`` in the
    sector exactly when the value ``c`` lies in the sector, which is a
    closed cone. Failures carry the sample and ``lambda = c``.
    """
    samples = triple_samples(t.n, grid_level)
    margin = np.inf
    total = 0
    for name, c in _components(t):
        x, xi = samples[name]
        total += len(x)
        try:
            v = _values(c, x, xi)
        except DomainError as exc:
            return EllipticityReport("certified-fail", 0.0, {"component": name, "error": str(exc)},
                                     total, [f"{name} is not evaluable on its domain"])
        inside = sector.contains(v)
        if np.any(inside):
            i = int(np.argmax(inside))
            return EllipticityReport("certified-fail", 0.0, _witness(name, x, xi, i, v[i]),
                                     total, [f"{name} takes a value in the sector"])
        d = sector.distance(v) * _weights(name, x, xi, t.order)
        margin = min(margin, float(np.min(d)))
    return EllipticityReport("sample-pass", margin, None, total)


# -- powers -------------------------------------------------------------------------

def _int_power(c: Component, p: int) -> Component:
    if c.is_real:
        return Component(ex.power(c.re, float(p)))
    if p < 0:
        raise BranchError("negative powers of complex components are not supported")
    out, base = ONE_COMPONENT, c
    while p:
        if p & 1:
            out = out * base
        base = base * base
        p >>= 1
    return out


def power_leading_triple(t: PrincipalTriple, z, grid_level: int = 64) -> PrincipalTriple:
    """Leading triple of the complex power ``A^z``: each element raised to ``z``.

    Only real ``z`` is supported. For non-integer ``z`` every element must be
    real and strictly positive on its sample set (principal branch).
    """
    if isinstance(z, complex):
        if z.imag != 0:
            raise BranchError("only real exponents are supported at the leading level")
        z = z.real
    zf = to_fraction(z)
    if zf == 1:
        return t
    order = t.order.scaled(zf)
    if zf.denominator == 1:
        p = int(zf)
        return PrincipalTriple(*(_int_power(c, p) for _, c in _components(t)), t.n, order)
    samples = triple_samples(t.n, grid_level)
    out = []
    for name, c in _components(t):
        if not c.is_real:
            raise BranchError(f"{name} is complex; non-integer powers need a positive element")
        x, xi = samples[name]
        v = _values(c, x, xi).real
        if np.any(~(v > 0)):
            i = int(np.argmax(~(v > 0)))
            raise BranchError(f"{name} is not positive at x={x[i].tolist()}, xi={xi[i].tolist()}")
        out.append(Component(ex.power(c.re, float(zf))))
    return PrincipalTriple(*out, t.n, order)
