"""SG-classical symbols stored through their double homogeneous expansions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping, Sequence, Union

import numpy as np

from . import expr as ex
from .errors import (
    CompatibilityError, DomainError, HomogeneityError, MissingComponentError,
)

__all__ = [
    "OrderPair", "Component", "Excision", "SGClassicalSymbol", "PrincipalTriple",
    "make_symbol", "evaluate_symbol", "principal_triple", "compactify",
    "add_symbols", "scale_symbol", "to_fraction", "sample_directions",
]

Number = Union[int, float, Fraction]


def to_fraction(v) -> Fraction:
    """Exact rational from int, Fraction, numeric string, or float.

    Floats within 1e-12 of a fraction with denominator <= 1000 snap to it,
    so ``-1/3`` typed as a float still gives ``Fraction(-1, 3)``.
    """
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, np.integer)):
        return Fraction(int(v))
    if isinstance(v, str):
        return Fraction(v)
    f = Fraction(float(v))
    g = f.limit_denominator(1000)
    return g if abs(float(g) - float(v)) <= 1e-12 * max(1.0, abs(float(v))) else f


@dataclass(frozen=True)
class OrderPair:
    """Order ``(m1, m2)``: m1 is the xi-order, m2 the x-order."""

    m1: Fraction
    m2: Fraction

    def __init__(self, m1: Number, m2: Number):
        object.__setattr__(self, "m1", to_fraction(m1))
        object.__setattr__(self, "m2", to_fraction(m2))

    @property
    def is_integer(self) -> bool:
        return self.m1.denominator == 1 and self.m2.denominator == 1

    def __iter__(self):
        yield self.m1
        yield self.m2

    def __add__(self, other: "OrderPair") -> "OrderPair":
        return OrderPair(self.m1 + other.m1, self.m2 + other.m2)

    def scaled(self, z: Number) -> "OrderPair":
        z = to_fraction(z)
        return OrderPair(self.m1 * z, self.m2 * z)

    def __repr__(self) -> str:
        return f"OrderPair({self.m1}, {self.m2})"


@dataclass(frozen=True)
class Component:
    """A complex-valued component ``re + i*im`` with real expression parts."""

    re: ex.Expr
    im: ex.Expr = ex.ZERO

    @classmethod
    def of(cls, value, n: int | None = None) -> "Component":
        if isinstance(value, Component):
            return value
        if isinstance(value, Mapping):
            return cls(ex.as_expr(value.get("re", 0.0), n), ex.as_expr(value.get("im", 0.0), n))
        if isinstance(value, complex):
            return cls(ex.Const(value.real), ex.Const(value.imag))
        return cls(ex.as_expr(value, n))

    @property
    def is_real(self) -> bool:
        return isinstance(self.im, ex.Const) and self.im.value == 0.0

    @property
    def is_zero(self) -> bool:
        return self.is_real and isinstance(self.re, ex.Const) and self.re.value == 0.0

    def evaluate(self, x, xi):
        r = ex.evaluate(self.re, x, xi)
        if self.is_real:
            return r
        return r + 1j * ex.evaluate(self.im, x, xi)

    def differentiate(self, v) -> "Component":
        return Component(ex.differentiate(self.re, v), ex.differentiate(self.im, v))

    def __add__(self, other: "Component") -> "Component":
        return Component(ex.add(self.re, other.re), ex.add(self.im, other.im))

    def __sub__(self, other: "Component") -> "Component":
        return Component(ex.sub(self.re, other.re), ex.sub(self.im, other.im))

    def __mul__(self, other: "Component") -> "Component":
        if self.is_real and other.is_real:
            return Component(ex.mul(self.re, other.re))
        re = ex.sub(ex.mul(self.re, other.re), ex.mul(self.im, other.im))
        im = ex.add(ex.mul(self.re, other.im), ex.mul(self.im, other.re))
        return Component(re, im)

    def scale(self, c: complex) -> "Component":
        c = complex(c)
        a, b = ex.Const(c.real), ex.Const(c.imag)
        if c.imag == 0.0:
            return Component(ex.mul(a, self.re), ex.mul(a, self.im))
        re = ex.sub(ex.mul(a, self.re), ex.mul(b, self.im))
        im = ex.add(ex.mul(a, self.im), ex.mul(b, self.re))
        return Component(re, im)

    def __str__(self) -> str:
        if self.is_real:
            return ex.to_text(self.re)
        return f"({ex.to_text(self.re)}) + i*({ex.to_text(self.im)})"

    def to_json(self):
        if self.is_real:
            return ex.to_text(self.re)
        return {"re": ex.to_text(self.re), "im": ex.to_text(self.im)}


ZERO_COMPONENT = Component(ex.ZERO)
ONE_COMPONENT = Component(ex.ONE)


def _g(t):
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)


def smooth_step(t):
    """Smooth transition from 0 (t <= 0) to 1 (t >= 1)."""
    t = np.asarray(t, dtype=float)
    a, b = _g(t), _g(1.0 - t)
    out = a / (a + b)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Excision:
    """Radial 0-excision function, 0 for |u| <= inner and 1 for |u| >= outer."""

    inner: float = 0.5
    outer: float = 1.0

    def profile(self, t):
        return smooth_step((np.asarray(t, dtype=float) - self.inner) / (self.outer - self.inner))

    def __call__(self, u: Sequence):
        r = np.sqrt(sum(np.square(np.asarray(c, dtype=float)) for c in u))
        return self.profile(r)


DEFAULT_EXCISION = Excision()


@dataclass(frozen=True)
class PrincipalTriple:
    """Principal triple with the data needed to weight it."""

    sigma_psi: Component
    sigma_e: Component
    sigma_psie: Component
    n: int
    order: OrderPair


@dataclass(frozen=True)
class SGClassicalSymbol:
    """Double homogeneous expansion of an SG-classical symbol.

    ``psi[j]`` has xi-degree ``m1 - j``, ``e[k]`` has x-degree ``m2 - k``
    and ``corner[(j, k)]`` is bi-homogeneous of degree ``(m1 - j, m2 - k)``.
    Indices below the depths that are not stored are identically zero.
    ``full`` optionally holds an exact expression for the whole symbol.
    """

    n: int
    order: OrderPair
    psi: Mapping[int, Component]
    e: Mapping[int, Component]
    corner: Mapping[tuple, Component]
    depths: tuple
    full: Component | None = None
    excision: Excision = DEFAULT_EXCISION
    name: str = ""

    @property
    def P(self) -> int:
        return self.depths[0]

    @property
    def Q(self) -> int:
        return self.depths[1]

    def psi_component(self, j: int) -> Component:
        if j < 0:
            raise MissingComponentError(f"negative psi index {j}")
        if j in self.psi:
            return self.psi[j]
        if j < self.P:
            return ZERO_COMPONENT
        raise MissingComponentError(f"psi component {j} beyond depth P={self.P}")

    def e_component(self, k: int) -> Component:
        if k < 0:
            raise MissingComponentError(f"negative e index {k}")
        if k in self.e:
            return self.e[k]
        if k < self.Q:
            return ZERO_COMPONENT
        raise MissingComponentError(f"e component {k} beyond depth Q={self.Q}")

    def corner_component(self, j: int, k: int) -> Component:
        if j < 0 or k < 0:
            raise MissingComponentError(f"negative corner index {(j, k)}")
        if (j, k) in self.corner:
            return self.corner[(j, k)]
        if j < self.P and k < self.Q:
            return ZERO_COMPONENT
        raise MissingComponentError(
            f"corner component {(j, k)} beyond depths {(self.P, self.Q)}")

    def psi_degree(self, j: int) -> Fraction:
        return self.order.m1 - j

    def e_degree(self, k: int) -> Fraction:
        return self.order.m2 - k

    def with_excision(self, w: Excision) -> "SGClassicalSymbol":
        return replace(self, excision=w)


# -- sampling helpers -------------------------------------------------------------

def sample_directions(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Random unit vectors, shape (count, n)."""
    v = rng.standard_normal((count, n))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _cols(a: np.ndarray) -> tuple:
    return tuple(a[..., i] for i in range(a.shape[-1]))


def _parse_map(m, n, key_kind):
    out = {}
    if not m:
        return out
    items = m.items() if isinstance(m, Mapping) else m
    for key, value in items:
        if key_kind == "pair":
            key = tuple(int(v) for v in key)
        else:
            key = int(key)
        c = Component.of(value, n)
        if not c.is_zero:
            out[key] = c
    return out


def _scaling_check(c: Component, degree: float, side: str, n, rng, rtol):
    """Sampled check of c(t*u) = t^d c(u) on the given side.

    Returns None when it holds, else the measured degree at the first
    failing sample.
    """
    count = 100
    u = sample_directions(n, count, rng)
    other = rng.standard_normal((count, n)) * 2.0
    for part in (c.re, c.im):
        if isinstance(part, ex.Const) and part.value == 0.0:
            continue
        for t in (2.0, 5.0, 10.0):
            if side == ex.XI:
                base = ex.evaluate(part, _cols(other), _cols(u))
                scaled = ex.evaluate(part, _cols(other), _cols(t * u))
            else:
                base = ex.evaluate(part, _cols(u), _cols(other))
                scaled = ex.evaluate(part, _cols(t * u), _cols(other))
            base = np.broadcast_to(base, (count,))
            scaled = np.broadcast_to(scaled, (count,))
            expect = t ** degree * base
            bad = np.abs(scaled - expect) > rtol * np.maximum(np.abs(expect), 1e-300)
            if np.any(bad):
                i = int(np.argmax(bad))
                if base[i] != 0 and scaled[i] / base[i] > 0:
                    return math.log(abs(scaled[i] / base[i])) / math.log(t)
                return float("nan")
    return None


def _check_homogeneous(label, c: Component, degree: Fraction, side: str, n, rng):
    d = float(degree)
    structural = [ex.infer_degree(p, side) for p in (c.re, c.im)
                  if not (isinstance(p, ex.Const) and p.value == 0.0)]
    if structural and all(s is not None for s in structural):
        if all(abs(s - d) <= 1e-12 * max(1.0, abs(d)) for s in structural):
            return
        wrong = next(s for s in structural if abs(s - d) > 1e-12 * max(1.0, abs(d)))
        raise HomogeneityError(
            f"{label} has {side}-degree {wrong:g}, declared {d:g}",
            component=label, measured_degree=wrong)
    measured = _scaling_check(c, d, side, n, rng, 1e-10)
    if measured is not None:
        raise HomogeneityError(
            f"{label} is not homogeneous of {side}-degree {d:g} "
            f"(measured {measured:.6g})", component=label, measured_degree=measured)


def _component_expansion(c: Component, side: str, degree, count, th_side, th_other):
    """Sphere values of the homogeneous terms of ``c`` at infinity."""
    parts = []
    excess = 0.0
    for p in (c.re, c.im):
        coeffs, ex_p = ex.expansion_coefficients(
            p, side, float(degree), count, _cols(th_side), _cols(th_other))
        parts.append(coeffs)
        excess = max(excess, ex_p)
    return parts[0] + 1j * parts[1], excess


def _check_compatibility(s: SGClassicalSymbol, rng, samples=64, tol=1e-10):
    """Compare each row/column expansion with the stored corner components.

    Row ``j`` is checked for ``k`` up to the largest stored corner index in
    that row (0 if none); columns likewise.
    """
    n = s.n
    th_x = sample_directions(n, samples, rng)
    th_xi = sample_directions(n, samples, rng)

    def compare(j, k, computed):
        c = s.corner_component(j, k)
        ref = np.broadcast_to(np.asarray(c.evaluate(_cols(th_x), _cols(th_xi)), dtype=complex),
                              (samples,))
        dev = float(np.max(np.abs(computed - ref)))
        scale = max(1.0, float(np.max(np.abs(ref))))
        if dev > tol * scale:
            raise CompatibilityError(
                f"corner {(j, k)} incompatible (max deviation {dev:.3e})",
                index=(j, k), deviation=dev)

    def expand(c, side, degree, count, label):
        try:
            if side == ex.X:
                out, excess = _component_expansion(c, side, degree, count, th_x, th_xi)
            else:
                out, excess = _component_expansion(c, side, degree, count, th_xi, th_x)
        except DomainError as exc:
            raise CompatibilityError(f"{label} has no classical expansion: {exc}") from None
        if excess > tol:
            raise CompatibilityError(
                f"{label} grows faster than its declared order (excess {excess:.3e})",
                deviation=excess)
        return out

    for j in sorted(set(s.psi) | {j for j, _ in s.corner}):
        kmax = min(max([k for jj, k in s.corner if jj == j] + [0]), s.Q - 1)
        coeffs = expand(s.psi_component(j), ex.X, s.order.m2, kmax + 1, f"psi[{j}]")
        for k in range(kmax + 1):
            compare(j, k, coeffs[k])
    for k in sorted(set(s.e) | {k for _, k in s.corner}):
        jmax = min(max([j for j, kk in s.corner if kk == k] + [0]), s.P - 1)
        coeffs = expand(s.e_component(k), ex.XI, s.order.m1, jmax + 1, f"e[{k}]")
        for j in range(jmax + 1):
            compare(j, k, coeffs[j])


def default_depths(n: int, order: OrderPair) -> tuple:
    P = max(1, math.floor(order.m1) + n + 1)
    Q = max(1, math.floor(order.m2) + n + 1)
    return P, Q


def make_symbol(n: int, order, psi_components=None, e_components=None,
                corner_components=None, depths=None, full=None,
                validate: bool = True, excision: Excision = DEFAULT_EXCISION,
                name: str = "", seed: int = 20240607) -> SGClassicalSymbol:
    """Build and validate an SG-classical symbol.

    Parameters
    ----------
    n : int
        Dimension.
    order : OrderPair or pair
        ``(m1, m2)``.
    psi_components, e_components : mapping
        ``j -> expression`` and ``k -> expression``. Values may be text,
        :class:`~sgres.expr.Expr`, or :class:`Component`.
    corner_components : mapping
        ``(j, k) -> expression``.
    depths : pair, optional
        ``(P, Q)``; defaults to ``(m1 + n + 1, m2 + n + 1)``.
    full : expression, optional
        Exact closed form of the symbol, used by :func:`evaluate_symbol`.
    validate : bool
        Run the homogeneity and compatibility checks.
    """
    if n not in (1, 2, 3):
        raise ValueError(f"dimension must be 1, 2 or 3, got {n}")
    order = order if isinstance(order, OrderPair) else OrderPair(*order)
    psi = _parse_map(psi_components, n, "int")
    e = _parse_map(e_components, n, "int")
    corner = _parse_map(corner_components, n, "pair")
    if depths is None:
        P, Q = default_depths(n, order)
        P = max([P] + [j + 1 for j in psi] + [j + 1 for j, _ in corner])
        Q = max([Q] + [k + 1 for k in e] + [k + 1 for _, k in corner])
    else:
        P, Q = (int(d) for d in depths)
    if P < 1 or Q < 1:
        raise ValueError("depths must be at least 1")
    for j in psi:
        if not 0 <= j < P:
            raise MissingComponentError(f"psi index {j} outside depth P={P}")
    for k in e:
        if not 0 <= k < Q:
            raise MissingComponentError(f"e index {k} outside depth Q={Q}")
    for j, k in corner:
        if not (0 <= j < P and 0 <= k < Q):
            raise MissingComponentError(f"corner index {(j, k)} outside depths {(P, Q)}")
    full_c = None if full is None else Component.of(full, n)
    s = SGClassicalSymbol(n, order, psi, e, corner, (P, Q), full_c, excision, name)
    if validate:
        rng = np.random.default_rng(seed)
        for j, c in psi.items():
            _check_homogeneous(f"psi[{j}]", c, order.m1 - j, ex.XI, n, rng)
        for k, c in e.items():
            _check_homogeneous(f"e[{k}]", c, order.m2 - k, ex.X, n, rng)
        for (j, k), c in corner.items():
            _check_homogeneous(f"corner[{j},{k}]", c, order.m1 - j, ex.XI, n, rng)
            _check_homogeneous(f"corner[{j},{k}]", c, order.m2 - k, ex.X, n, rng)
        _check_compatibility(s, rng)
    return s


def evaluate_symbol(s: SGClassicalSymbol, x, xi):
    """Evaluate the symbol at ``(x, xi)``.

    If an exact ``full`` expression is stored it is used. Otherwise the
    truncated expansions are glued with the excision ``w``::

        w(xi) sum_j psi_j + w(x) sum_k e_k - w(xi) w(x) sum_jk corner_jk

    which agrees with the symbol modulo SG^{m1-P, m2} + SG^{m1, m2-Q}.
    Components are only evaluated where their weight is positive, so
    singularities inside the dead zone of ``w`` are harmless.
    """
    x = tuple(np.asarray(c, dtype=float) for c in x)
    xi = tuple(np.asarray(c, dtype=float) for c in xi)
    if s.full is not None:
        return s.full.evaluate(x, xi)
    shape = np.broadcast(*x, *xi).shape
    wx = np.broadcast_to(s.excision(x), shape)
    wxi = np.broadcast_to(s.excision(xi), shape)
    total = np.zeros(shape, dtype=complex)
    for comps, w, sign in ((s.psi.values(), wxi, 1.0), (s.e.values(), wx, 1.0),
                           (s.corner.values(), wx * wxi, -1.0)):
        mask = w > 0
        if not np.any(mask):
            continue
        xs = tuple(np.broadcast_to(a, shape)[mask] for a in x)
        xis = tuple(np.broadcast_to(a, shape)[mask] for a in xi)
        for c in comps:
            total[mask] += sign * w[mask] * c.evaluate(xs, xis)
    if np.all(total.imag == 0):
        total = total.real
    return total[()] if total.ndim == 0 else total


def principal_triple(s: SGClassicalSymbol) -> PrincipalTriple:
    missing = [lab for lab, ok in (("psi[0]", 0 in s.psi), ("e[0]", 0 in s.e),
                                    ("corner[0,0]", (0, 0) in s.corner)) if not ok]
    if missing:
        raise MissingComponentError(f"principal triple needs {', '.join(missing)}")
    return PrincipalTriple(s.psi[0], s.e[0], s.corner[(0, 0)], s.n, s.order)


def _chi_and_bracket(u: np.ndarray):
    """Ball-to-space map chi and the bracket [u] on the open unit ball."""
    t = np.linalg.norm(u, axis=-1)
    beta = DEFAULT_EXCISION.profile(3.0 * t - 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = (1.0 - beta) + beta / np.where(beta > 0, t * (1.0 - t), 1.0)
    chi = u * np.asarray(h)[..., None]
    br = t * beta + (1.0 / 3.0) * (1.0 - beta)
    return chi, br


def compactify(s: SGClassicalSymbol, y, eta):
    """Compactified symbol ``(1-[eta])^m1 (1-[y])^m2 a(chi(y), chi(eta))``.

    ``y`` and ``eta`` are points (or arrays of points, last axis n) of the
    open unit ball.
    """
    y = np.asarray(y, dtype=float)
    eta = np.asarray(eta, dtype=float)
    if y.shape[-1] != s.n or eta.shape[-1] != s.n:
        raise ValueError("points must have last dimension n")
    if np.any(np.linalg.norm(y, axis=-1) >= 1.0) or np.any(np.linalg.norm(eta, axis=-1) >= 1.0):
        raise ValueError("compactify needs points of the open unit ball")
    cy, by = _chi_and_bracket(y)
    ce, be = _chi_and_bracket(eta)
    a = evaluate_symbol(s, _cols(cy), _cols(ce))
    out = (1.0 - be) ** float(s.order.m1) * (1.0 - by) ** float(s.order.m2) * a
    return float(out) if np.ndim(out) == 0 and not np.iscomplexobj(out) else out


def add_symbols(a: SGClassicalSymbol, b: SGClassicalSymbol) -> SGClassicalSymbol:
    """Componentwise sum of two symbols of the same order and dimension."""
    if a.n != b.n or a.order != b.order:
        raise ValueError("symbols must share dimension and order")

    def merge(ma, mb):
        out = dict(ma)
        for k, c in mb.items():
            out[k] = out[k] + c if k in out else c
        return {k: c for k, c in out.items() if not c.is_zero}

    full = None
    if a.full is not None and b.full is not None:
        full = a.full + b.full
    depths = (min(a.P, b.P), min(a.Q, b.Q))
    psi = {j: c for j, c in merge(a.psi, b.psi).items() if j < depths[0]}
    e = {k: c for k, c in merge(a.e, b.e).items() if k < depths[1]}
    corner = {jk: c for jk, c in merge(a.corner, b.corner).items()
              if jk[0] < depths[0] and jk[1] < depths[1]}
    return SGClassicalSymbol(a.n, a.order, psi, e, corner, depths, full, a.excision)


def scale_symbol(a: SGClassicalSymbol, c: complex) -> SGClassicalSymbol:
    """The symbol ``c * a``."""
    f = (lambda m: {k: v.scale(c) for k, v in m.items()})
    full = None if a.full is None else a.full.scale(c)
    return replace(a, psi=f(a.psi), e=f(a.e), corner=f(a.corner), full=full)
