"""Sphere, bi-sphere, ball and finite-part radial quadrature."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import FinitePartError

__all__ = [
    "SphereQuadrature", "RegularizedIntegralResult", "sphere_rule", "sphere_area",
    "bisphere_integral", "ball_integral", "finite_part_radial", "sample_sphere",
    "gauss_legendre",
]


@dataclass(frozen=True)
class SphereQuadrature:
    """Quadrature rule on the unit sphere S^{n-1}.

    Attributes
    ----------
    nodes : ndarray, shape (M, n)
    weights : ndarray, shape (M,)
    degree : int
        Spherical-harmonic degree integrated exactly.
    """

    n: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    degree: int = 0

    def coords(self) -> tuple:
        return tuple(self.nodes[:, i] for i in range(self.n))


def sphere_area(n: int) -> float:
    """|S^{n-1}|."""
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


@lru_cache(maxsize=None)
def gauss_legendre(count: int):
    x, w = leggauss(count)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=None)
def sphere_rule(n: int, level: int = 8) -> SphereQuadrature:
    """Product quadrature on S^{n-1}.

    n=1 uses the two points +-1, n=2 the trapezoid rule on ``4*level``
    equispaced angles, n=3 Gauss-Legendre in the polar cosine
    (``2*level`` nodes) times the trapezoid rule in azimuth (``4*level``).
    """
    if level < 1:
        raise ValueError("level must be positive")
    if n == 1:
        return SphereQuadrature(1, np.array([[1.0], [-1.0]]), np.array([1.0, 1.0]), 1 << 30)
    if n == 2:
        m = 4 * level
        phi = 2 * np.pi * np.arange(m) / m
        nodes = np.column_stack([np.cos(phi), np.sin(phi)])
        return SphereQuadrature(2, nodes, np.full(m, 2 * np.pi / m), m - 1)
    if n == 3:
        t, wt = gauss_legendre(2 * level)
        m = 4 * level
        phi = 2 * np.pi * np.arange(m) / m
        s = np.sqrt(1.0 - t * t)
        nodes = np.column_stack([
            np.outer(s, np.cos(phi)).ravel(),
            np.outer(s, np.sin(phi)).ravel(),
            np.repeat(t, m),
        ])
        w = np.outer(wt, np.full(m, 2 * np.pi / m)).ravel()
        return SphereQuadrature(3, nodes, w, min(4 * level - 1, m - 1))
    raise ValueError(f"unsupported dimension {n}; sphere rules exist for n in 1, 2, 3")


def sample_sphere(n: int, count: int = 256) -> np.ndarray:
    """Deterministic, roughly equidistributed points on S^{n-1}.

    ``{+1, -1}`` for n=1, equispaced angles for n=2 and a Fibonacci
    lattice for n=3.
    """
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        phi = 2 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(phi), np.sin(phi)])
    if n == 3:
        i = np.arange(count) + 0.5
        z = 1.0 - 2.0 * i / count
        phi = np.pi * (1.0 + math.sqrt(5.0)) * i
        s = np.sqrt(1.0 - z * z)
        return np.column_stack([s * np.cos(phi), s * np.sin(phi), z])
    raise ValueError(f"unsupported dimension {n}")


def bisphere_integral(f: Callable, r1: SphereQuadrature, r2: SphereQuadrature):
    """Integrate ``f(theta_x, theta_xi)`` over S^{n-1} x S^{n-1}.

    ``f`` receives two tuples of coordinate arrays (x-sphere first) of the
    node pairs and must return an array of values broadcastable to the
    number of pairs.
    """
    ia, ib = np.meshgrid(np.arange(len(r1.weights)), np.arange(len(r2.weights)), indexing="ij")
    ia, ib = ia.ravel(), ib.ravel()
    a, b = r1.nodes[ia], r2.nodes[ib]
    vals = f(tuple(a.T), tuple(b.T))
    vals = np.broadcast_to(np.asarray(vals), ia.shape)
    w = r1.weights[ia] * r2.weights[ib]
    out = np.sum(w * vals)
    return complex(out) if np.iscomplexobj(out) and out.imag != 0 else float(np.real(out))


def _check_finite(vals, where, points):
    bad = ~np.isfinite(vals)
    if np.any(bad):
        i = int(np.argmax(bad.ravel()))
        loc = [float(c.ravel()[i]) for c in points]
        raise FinitePartError(f"non-finite integrand {where} at x={loc}")


def _radial_panels(a: float, b: float, per_decade: int = 64):
    """Gauss-Legendre nodes on [a, b], one panel per decade (a, b > 0)."""
    edges = [a]
    while edges[-1] * 10.0 < b * (1 - 1e-12):
        edges.append(edges[-1] * 10.0)
    edges.append(b)
    t, w = gauss_legendre(per_decade)
    rs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        rs.append(0.5 * (hi - lo) * t + 0.5 * (hi + lo))
        ws.append(0.5 * (hi - lo) * w)
    return np.concatenate(rs), np.concatenate(ws)


def _polar(f, rule, r, wr, n):
    """sum over radial nodes r and sphere nodes of f(r*theta) r^{n-1}."""
    pts = r[:, None, None] * rule.nodes[None, :, :]
    coords = tuple(pts[..., i] for i in range(n))
    vals = np.broadcast_to(np.asarray(f(coords)), pts.shape[:2])
    _check_finite(vals, "in polar quadrature", coords)
    return np.einsum("i,ij,j->", wr * r ** (n - 1), vals, rule.weights)


def ball_integral(f: Callable, radius: float, rule: SphereQuadrature, radial_nodes: int = 64):
    """Integral of ``f`` over the ball ``|x| <= radius`` in polar coordinates.

    ``f`` receives a tuple of coordinate arrays. Gauss-Legendre in the
    radius (``radial_nodes`` points on [0, 1] and on each decade beyond)
    times the sphere rule.
    """
    t, w = gauss_legendre(radial_nodes)
    inner = min(radius, 1.0)
    r = [0.5 * inner * (t + 1.0)]
    wr = [0.5 * inner * w]
    if radius > 1.0:
        ro, wo = _radial_panels(1.0, radius, radial_nodes)
        r.append(ro)
        wr.append(wo)
    return float(np.real(_polar(f, rule, np.concatenate(r), np.concatenate(wr), rule.n)))


@dataclass
class RegularizedIntegralResult:
    """Finite part of ``int_{|x| <= tau} g`` as ``tau -> infinity``.

    ``int_{|x|<=tau} g = finite_part + log_coefficient*log(tau)
    + sum_p power_coefficients[p] * tau**p + o(1)``.
    """

    finite_part: float
    log_coefficient: float
    power_coefficients: dict
    tail_error_estimate: float

    def truncated(self, tau: float) -> float:
        """Asymptotic model of the truncated integral at radius ``tau``."""
        return (self.finite_part + self.log_coefficient * math.log(tau)
                + sum(c * tau ** p for p, c in self.power_coefficients.items()))


def finite_part_radial(g: Callable, x_expansion: Sequence, n: int,
                       rule: SphereQuadrature | None = None,
                       inner_nodes: int = 64, tail_nodes: int = 64,
                       tail_check: Sequence[float] = (1e2, 1e3, 1e4)) -> RegularizedIntegralResult:
    """Finite part of the integral of ``g`` over R^n.

    Parameters
    ----------
    g : callable
        ``g(coords)`` with coords a tuple of n arrays.
    x_expansion : list of (degree, h)
        Homogeneous terms of ``g`` at infinity of degree ``>= -n``; ``h``
        is the term on the unit sphere (callable on coordinate tuples).
        Degrees come from symbol metadata and are never inferred.
    n : int
        Dimension.

    Notes
    -----
    With ``H_e`` the sphere integral of the degree-``e`` term::

        int_{|x|<=tau} g = int_{|x|<=1} g + int_{|x|>=1} (g - sum_e h_e)
                           + H_{-n} log tau + sum_{e>-n} H_e (tau^{e+n} - 1)/(e+n) + o(1)

    The tail integral uses ``t = 1/rho``, which makes it a proper integral
    over ``(0, 1]`` for symbol data (cost independent of decay).
    """
    rule = rule or sphere_rule(n, 8)
    terms = []
    for d, h in x_expansion:
        d = float(d)
        if d < -n - 1e-12:
            continue
        H = float(np.real(np.sum(np.broadcast_to(np.asarray(h(rule.coords())), rule.weights.shape)
                                 * rule.weights)))
        terms.append((d, h, H))

    # inner ball; Gauss nodes avoid the origin, integrability is probed
    t, w = gauss_legendre(inner_nodes)
    r = 0.5 * (t + 1.0)
    wr = 0.5 * w
    inner = _polar(g, rule, r, wr, n)
    _probe_origin(g, rule, n)

    def remainder(coords, rho):
        v = np.broadcast_to(np.asarray(g(coords)), rho.shape)
        size = np.abs(v)
        unit = tuple(c / rho for c in coords)
        for d, h, _ in terms:
            hv = rho ** d * np.broadcast_to(np.asarray(h(unit)), rho.shape)
            v = v - hv
            size = np.maximum(size, np.abs(hv))
        return v, size

    # tail: int_1^inf rho^{n-1} R(rho) d rho = int_0^1 t^{-n-1} R(1/t) dt
    tq, tw = gauss_legendre(tail_nodes)
    tt = 0.5 * (tq + 1.0)
    tw = 0.5 * tw
    rho = 1.0 / tt
    pts = rho[:, None, None] * rule.nodes[None, :, :]
    coords = tuple(pts[..., i] for i in range(n))
    R, _ = remainder(coords, np.broadcast_to(rho[:, None], pts.shape[:2]))
    _check_finite(R, "in tail", coords)
    tail = np.einsum("i,ij,j->", tw * tt ** (-n - 1.0), R, rule.weights)
    est = _tail_probe(remainder, rule, n, tail_check)

    fp = inner + tail
    powers = {}
    log_coef = 0.0
    for d, _, H in terms:
        if abs(d + n) < 1e-12:
            log_coef += H
        else:
            p = d + n
            fp -= H / p
            powers[p] = powers.get(p, 0.0) + H / p
    return RegularizedIntegralResult(float(np.real(fp)), float(log_coef), powers, est)


def _probe_origin(g, rule, n):
    """Reject integrands with a non-integrable singularity at 0."""
    rs = np.array([1e-4, 1e-6, 1e-8])
    pts = rs[:, None, None] * rule.nodes[None, :, :]
    coords = tuple(pts[..., i] for i in range(n))
    with np.errstate(all="ignore"):
        try:
            v = np.abs(np.broadcast_to(np.asarray(g(coords)), pts.shape[:2]))
        except Exception as exc:  # singular evaluation at tiny radius
            raise FinitePartError(f"integrand not evaluable near the origin: {exc}") from None
    if not np.all(np.isfinite(v)):
        raise FinitePartError("integrand is singular at the origin")
    m = v.max(axis=1) * rs ** n
    # integrable iff rho^n |g| -> 0; growth of rho^n |g| means a divergent ball part
    if m[-1] > 1e-3 * max(1.0, m[0]) and m[-1] >= 0.5 * m[0]:
        raise FinitePartError("non-integrable singularity of the integrand at the origin")


def _tail_probe(remainder, rule, n, radii):
    """Check that the subtracted integrand decays faster than rho^{-n}.

    Returns a bound for the neglected tail beyond the smallest probe radius.
    """
    radii = np.asarray(radii, dtype=float)
    pts = radii[:, None, None] * rule.nodes[None, :, :]
    coords = tuple(pts[..., i] for i in range(n))
    R, size = remainder(coords, np.broadcast_to(radii[:, None], pts.shape[:2]))
    # cancellation floor: the remainder is a difference of terms of this size
    floor = 64 * np.finfo(float).eps * size.max(axis=1) * radii ** n
    mag = np.abs(R).max(axis=1) * radii ** n
    signal = mag > 10 * floor
    if signal[-1] and mag[-1] > 0.5 * mag[0]:
        raise FinitePartError(
            "subtracted integrand does not decay faster than |x|^-n; "
            "an expansion term of degree >= -n is missing")
    return float(2.0 * sphere_area(n) * np.max(np.maximum(mag, floor)))
