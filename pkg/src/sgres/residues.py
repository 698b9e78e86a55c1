"""Residue and regularized trace functionals, and zeta pole structure."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import expr as ex
from .errors import DerivativeDataRequired, DomainError, NonIntegerOrderError
from .quadrature import bisphere_integral, finite_part_radial, sphere_rule
from .symbol import Component, OrderPair, SGClassicalSymbol, to_fraction

__all__ = [
    "wres", "tr_psi_hat", "tr_e_hat", "angular_term", "tr_x_xi", "combine_tr_x_xi",
    "residue_report", "Pole", "ZetaPoleStructure", "LaurentData",
    "zeta_pole_structure", "kernel_diag_poles", "default_level",
]


def default_level(n: int) -> int:
    """Sphere-rule level used by the functionals (exact for preset data)."""
    return {1: 1, 2: 16, 3: 12}[n]


def _nonneg_int(v: Fraction):
    """``int(v)`` if v is a non-negative integer, else None."""
    return int(v) if v.denominator == 1 and v >= 0 else None


def _scale(n: int) -> float:
    return (2 * math.pi) ** (-n)


def _real(v):
    if isinstance(v, complex) and v.imag == 0:
        return v.real
    return v


def _bisphere(c: Component, n: int, level: int | None = None):
    rule = sphere_rule(n, level or default_level(n))
    return bisphere_integral(lambda a, b: c.evaluate(a, b), rule, rule)


def wres(s: SGClassicalSymbol, notes: list | None = None, level: int | None = None):
    """Residue trace: ``(2 pi)^-n`` times the bi-sphere integral of a_{-n,-n}.

    Returns 0 (and appends a note to ``notes``) when the (-n, -n) component
    is absent, either because its index is negative or because it lies
    beyond the stored depths.

    Raises
    ------
    NonIntegerOrderError
        If the order is not an integer pair.
    """
    if not s.order.is_integer:
        raise NonIntegerOrderError(f"residue needs integer orders, got {s.order}")
    n = s.n
    j, k = int(s.order.m1) + n, int(s.order.m2) + n
    if j < 0 or k < 0 or j >= s.P or k >= s.Q:
        _note(notes, f"vanishing component: a_(-{n},-{n}) at index {(j, k)} is absent")
        return 0.0
    c = s.corner_component(j, k)
    if c.is_zero:
        _note(notes, f"vanishing component: a_(-{n},-{n}) at index {(j, k)} is zero")
        return 0.0
    return _real(_scale(n) * _bisphere(c, n, level))


def _note(notes, text):
    if notes is not None:
        notes.append(text)


def _hat(s: SGClassicalSymbol, side: str, notes, level):
    """Shared implementation of the two regularized partial traces.

    ``side`` is the variable integrated over R^n (x for the psi-trace).
    """
    n = s.n
    rule = sphere_rule(n, level or default_level(n))
    if side == ex.X:
        own, other = s.order.m1, s.order.m2
        label = "psi"
    else:
        own, other = s.order.m2, s.order.m1
        label = "e"
    idx = _nonneg_int(own + n)
    if idx is None:
        _note(notes, f"vanishing component: the degree -{n} {label}-component does not exist")
        return 0.0
    comp = s.psi_component(idx) if side == ex.X else s.e_component(idx)
    if comp.is_zero:
        _note(notes, f"vanishing component: {label}[{idx}] is zero")
        return 0.0
    expansion = []
    kmax = math.floor(other + n)
    for k in range(0, kmax + 1):
        corner = s.corner_component(idx, k) if side == ex.X else s.corner_component(k, idx)
        degree = other - k
        if not corner.is_zero:
            expansion.append((degree, _sphere_average(corner, side, rule)))

    def g(coords):
        return _sphere_average_full(comp, side, rule, coords)

    res = finite_part_radial(g, expansion, n, rule)
    return _scale(n) * res.finite_part


def _sphere_average(c: Component, side: str, rule):
    """h(u) = integral over the opposite unit sphere of c at u (u on ``side``)."""

    def h(u):
        return _sphere_average_full(c, side, rule, u)

    return h


def _sphere_average_full(c: Component, side: str, rule, coords):
    coords = tuple(np.asarray(a, dtype=float) for a in coords)
    shape = np.broadcast(*coords).shape
    flat = tuple(np.broadcast_to(a, shape).ravel()[:, None] for a in coords)
    nodes = tuple(rule.nodes[None, :, i] for i in range(rule.n))
    if side == ex.X:
        v = c.evaluate(flat, nodes)
    else:
        v = c.evaluate(nodes, flat)
    v = np.broadcast_to(np.asarray(v), (flat[0].shape[0], len(rule.weights)))
    if np.iscomplexobj(v):
        if np.any(v.imag != 0):
            raise DomainError("regularized traces of complex components are not supported")
        v = v.real
    return (v @ rule.weights).reshape(shape)


def tr_psi_hat(s: SGClassicalSymbol, notes: list | None = None, level: int | None = None) -> float:
    """Regularized x-integral of the sphere integral of ``a_{-n,.}``.

    The growing part of the x-expansion (corners ``(m1+n, k)`` with degree
    ``m2 - k >= -n``) is subtracted; the degree ``-n`` corner supplies the
    log term. Corners absent from the symbol count as zero.
    """
    return _hat(s, ex.X, notes, level)


def tr_e_hat(s: SGClassicalSymbol, notes: list | None = None, level: int | None = None) -> float:
    """Mirror image of :func:`tr_psi_hat` with x and xi exchanged."""
    return _hat(s, ex.XI, notes, level)


def angular_term(s: SGClassicalSymbol, derivative=None, notes: list | None = None,
                 level: int | None = None) -> float:
    """Angular term of the regularized trace.

    Parameters
    ----------
    s : SGClassicalSymbol
    derivative : expression, optional
        The z-derivative at z=1 of the powered component whose indices are
        ``(m1 + n, m2 + n)``. If given, its bi-sphere integral is used.

    Notes
    -----
    Without derivative data the term is computable in two cases. If either
    index ``m1 + n`` or ``m2 + n`` is not a non-negative integer the
    component family is empty and the term is 0. For order ``(-n, -n)`` it
    is the bi-sphere integral of ``a log a`` with ``a = a_{-n,-n} > 0``.

    Raises
    ------
    DerivativeDataRequired
        In every other case.
    DomainError
        If the log formula applies but ``a_{-n,-n}`` is not positive.
    """
    n = s.n
    if derivative is not None:
        c = Component.of(derivative, n)
        return _real(_scale(n) * _bisphere(c, n, level))
    j, k = _nonneg_int(s.order.m1 + n), _nonneg_int(s.order.m2 + n)
    if j is None or k is None:
        _note(notes, "angular term vanishes: the powered corner index is not a non-negative integer")
        return 0.0
    if s.order.m1 == -n and s.order.m2 == -n:
        c = s.corner_component(0, 0)
        if c.is_zero:
            _note(notes, "angular term vanishes: a_(-n,-n) is zero")
            return 0.0
        if not c.is_real:
            raise DomainError("log formula needs a real a_(-n,-n)")
        rule = sphere_rule(n, level or default_level(n))

        def f(a, b):
            v = np.asarray(ex.evaluate(c.re, a, b), dtype=float)
            if np.any(v <= 0):
                raise DomainError("log formula needs a_(-n,-n) > 0 on the bi-sphere")
            return v * np.log(v)

        return _scale(n) * bisphere_integral(f, rule, rule)
    raise DerivativeDataRequired(
        f"angular term for order {s.order} requires derivative data of the power family")


def combine_tr_x_xi(psi_hat, e_hat, angular, m1, m2):
    """``-psi_hat/m1 - e_hat/m2 + angular/(m1 m2)`` in the arithmetic of the inputs."""
    return -psi_hat / m1 - e_hat / m2 + angular / (m1 * m2)


def tr_x_xi(s: SGClassicalSymbol, m1=None, m2=None, derivative=None,
            notes: list | None = None, level: int | None = None) -> float:
    """Regularized trace functional combining the three constituents.

    The weights ``m1``, ``m2`` default to the order of ``s``. For the Weyl
    constants ``s`` is the leading data of ``A^{-n/m}`` and the weights are
    its order ``(-n, -n)``.
    """
    m1 = s.order.m1 if m1 is None else to_fraction(m1)
    m2 = s.order.m2 if m2 is None else to_fraction(m2)
    if m1 == 0 or m2 == 0:
        raise ValueError("weights must be nonzero")
    p = tr_psi_hat(s, notes, level)
    e = tr_e_hat(s, notes, level)
    a = angular_term(s, derivative, notes, level)
    return combine_tr_x_xi(p, e, a, float(m1), float(m2))


def residue_report(s: SGClassicalSymbol, derivative=None, level: int | None = None) -> dict:
    """All computable functionals of ``s`` with provenance notes.

    Unavailable values are ``None`` with the reason in ``notes``.
    """
    notes: list = []
    out: dict = {"order": [str(s.order.m1), str(s.order.m2)], "n": s.n}
    try:
        out["TR"] = wres(s, notes, level)
    except NonIntegerOrderError as exc:
        out["TR"] = None
        notes.append(f"TR unavailable: {exc}")
    out["Tr_psi_hat"] = tr_psi_hat(s, notes, level)
    out["Tr_e_hat"] = tr_e_hat(s, notes, level)
    try:
        out["angular"] = angular_term(s, derivative, notes, level)
    except DerivativeDataRequired as exc:
        out["angular"] = None
        notes.append(f"angular term unavailable: requires derivative data ({exc})")
    if out["angular"] is None or s.order.m1 == 0 or s.order.m2 == 0:
        out["TR_x_xi"] = None
        if out["angular"] is not None:
            notes.append("TR_x_xi unavailable: zero order weight")
    else:
        out["TR_x_xi"] = combine_tr_x_xi(out["Tr_psi_hat"], out["Tr_e_hat"], out["angular"],
                                         float(s.order.m1), float(s.order.m2))
    out["notes"] = notes
    return out


# -- zeta pole structure --------------------------------------------------------------

@dataclass(frozen=True)
class Pole:
    location: Fraction
    order: int
    family: str  # "psi", "e" or "both"
    j: int | None
    k: int | None

    def to_dict(self) -> dict:
        return {"location": str(self.location), "value": float(self.location),
                "order": self.order, "family": self.family, "j": self.j, "k": self.k}


@dataclass(frozen=True)
class ZetaPoleStructure:
    order: OrderPair
    n: int
    poles: tuple
    holomorphy_bound: Fraction

    def locations(self) -> list:
        return [p.location for p in self.poles]


@dataclass(frozen=True)
class LaurentData:
    """Leading Laurent coefficients ``A2/(z-z0)^2 + A1/(z-z0)`` at ``z0``."""

    z0: object
    A2: object
    A1: object


def _positive_integer_orders(order: OrderPair):
    if not order.is_integer or order.m1 <= 0 or order.m2 <= 0:
        raise NonIntegerOrderError(f"pole structure needs positive integer orders, got {order}")
    return int(order.m1), int(order.m2)


def zeta_pole_structure(order, n: int, j_max: int, k_max: int) -> ZetaPoleStructure:
    """Candidate poles ``(j-n)/m1`` and ``(k-n)/m2`` with order-2 coincidences.

    A location is listed once; it has order 2 (family ``both``) when it is
    hit by both families, with the smallest such ``j`` and ``k`` reported.
    Arithmetic is exact (fractions).
    """
    order = order if isinstance(order, OrderPair) else OrderPair(*order)
    m1, m2 = _positive_integer_orders(order)
    if j_max < 0 or k_max < 0:
        raise ValueError("j_max and k_max must be non-negative")
    psi = {}
    for j in range(j_max + 1):
        psi.setdefault(Fraction(j - n, m1), j)
    e = {}
    for k in range(k_max + 1):
        e.setdefault(Fraction(k - n, m2), k)
    poles = []
    for z in sorted(set(psi) | set(e)):
        if z in psi and z in e:
            poles.append(Pole(z, 2, "both", psi[z], e[z]))
        elif z in psi:
            poles.append(Pole(z, 1, "psi", psi[z], None))
        else:
            poles.append(Pole(z, 1, "e", None, e[z]))
    bound = min(Fraction(-n, m1), Fraction(-n, m2))
    return ZetaPoleStructure(order, n, tuple(poles), bound)


def kernel_diag_poles(order, n: int, j_max: int) -> list:
    """Simple poles ``(j - n)/m1``, ``j = 0..j_max``, of the kernel on the diagonal."""
    order = order if isinstance(order, OrderPair) else OrderPair(*order)
    if order.m1.denominator != 1 or order.m1 == 0:
        raise NonIntegerOrderError(f"kernel poles need a nonzero integer m1, got {order.m1}")
    m1 = int(order.m1)
    return [Fraction(j - n, m1) for j in range(j_max + 1)]
