"""Closed-form expression language for symbol components.

Expressions are immutable trees over the variables ``x1..xn`` and
``xi1..xin``. They support exact symbolic differentiation, structural
homogeneity inference and vectorized numpy evaluation.

Grammar (EBNF)::

    expr     = term , { ("+" | "-") , term } ;
    term     = unary , { ("*" | "/") , unary } ;
    unary    = "-" , unary | power ;
    power    = primary , [ "^" , exponent ] ;
    exponent = [ "-" ] , number | "(" , expr , ")" ;      (* constant *)
    primary  = number | variable | "|x|" | "|xi|" | "<x>" | "<xi>"
             | ( "log" | "exp" ) , "(" , expr , ")"
             | "(" , expr , ")" ;
    variable = "x" , digits | "xi" , digits ;
    number   = digits , [ "." , [ digits ] ] , [ exponent-part ]
             | "." , digits , [ exponent-part ] ;

Powers bind tighter than unary minus, so ``-x1^2`` is ``-(x1^2)``.
Exponents must be constant; chained powers need parentheses.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import ArityError, DomainError, ParseError, UnknownIdentifierError

__all__ = [
    "Expr", "Const", "Var", "Norm", "Bracket", "Add", "Sub", "Mul", "Div",
    "Neg", "Pow", "Log", "Exp", "ZERO", "ONE", "parse", "to_text",
    "evaluate", "differentiate", "infer_degree", "depends_on", "as_expr",
    "expansion_coefficients", "const", "var", "add", "sub", "mul", "div", "neg", "power", "log", "exp",
]

X, XI = "x", "xi"


class Expr:
    """Base class of expression nodes."""

    prec = 5

    def __str__(self) -> str:
        return to_text(self)

    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return sub(self, as_expr(other))

    def __rsub__(self, other):
        return sub(as_expr(other), self)

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, p):
        return power(self, float(p))


def _node(cls):
    """Frozen dataclass with a cached structural hash."""
    cls = dataclass(frozen=True, eq=True, repr=True)(cls)
    raw_hash = cls.__hash__

    def __hash__(self):
        try:
            return object.__getattribute__(self, "_h")
        except AttributeError:
            h = raw_hash(self)
            object.__setattr__(self, "_h", h)
            return h

    cls.__hash__ = __hash__
    return cls


@_node
class Const(Expr):
    value: float


@_node
class Var(Expr):
    side: str
    index: int  # 1-based


@_node
class Norm(Expr):
    side: str


@_node
class Bracket(Expr):
    side: str


@_node
class Add(Expr):
    left: Expr
    right: Expr
    prec = 1


@_node
class Sub(Expr):
    left: Expr
    right: Expr
    prec = 1


@_node
class Mul(Expr):
    left: Expr
    right: Expr
    prec = 2


@_node
class Div(Expr):
    left: Expr
    right: Expr
    prec = 2


@_node
class Neg(Expr):
    arg: Expr
    prec = 3


@_node
class Pow(Expr):
    base: Expr
    exponent: float
    prec = 4


@_node
class Log(Expr):
    arg: Expr


@_node
class Exp(Expr):
    arg: Expr


ZERO = Const(0.0)
ONE = Const(1.0)

ExprLike = Union[Expr, str, int, float]


def const(c: float) -> Const:
    return Const(float(c))


def var(name: str) -> Var:
    m = re.fullmatch(r"(xi|x)([1-9][0-9]*)", name)
    if m is None:
        raise ValueError(f"not a variable name: {name!r}")
    return Var(m.group(1), int(m.group(2)))


def as_expr(e: ExprLike, n: int | None = None) -> Expr:
    if isinstance(e, Expr):
        return e
    if isinstance(e, str):
        return parse(e, n)
    if isinstance(e, (int, float, np.floating, np.integer)):
        return Const(float(e))
    raise TypeError(f"cannot convert {type(e).__name__} to an expression")


def _is_const(e: Expr, value: float | None = None) -> bool:
    return isinstance(e, Const) and (value is None or e.value == value)


# -- smart constructors with light constant folding --------------------------

def add(a: Expr, b: Expr) -> Expr:
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    if isinstance(b, Neg):
        return Sub(a, b.arg)
    return Add(a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return neg(b)
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    if isinstance(b, Neg):
        return Add(a, b.arg)
    return Sub(a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return ZERO
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    if _is_const(a, -1.0):
        return neg(b)
    if _is_const(b, -1.0):
        return neg(a)
    return Mul(a, b)


def div(a: Expr, b: Expr) -> Expr:
    if _is_const(a, 0.0):
        return ZERO
    if _is_const(b, 1.0):
        return a
    if isinstance(a, Const) and isinstance(b, Const) and b.value != 0.0:
        return Const(a.value / b.value)
    return Div(a, b)


def neg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def power(base: Expr, p: float) -> Expr:
    p = float(p)
    if p == 0.0:
        return ONE
    if p == 1.0:
        return base
    if isinstance(base, Const):
        b = base.value
        if b > 0 or float(p).is_integer() and (b != 0 or p > 0):
            return Const(b ** p)
    if isinstance(base, Pow) and float(p).is_integer():
        return Pow(base.base, base.exponent * p)
    return Pow(base, p)


def log(a: Expr) -> Expr:
    if _is_const(a, 1.0):
        return ZERO
    return Log(a)


def exp(a: Expr) -> Expr:
    if _is_const(a, 0.0):
        return ONE
    return Exp(a)


# -- printing -----------------------------------------------------------------

def _num(v: float) -> str:
    if not math.isfinite(v):
        raise ValueError("non-finite constants cannot be printed")
    s = repr(float(v))
    return s if v >= 0 and not s.startswith("-") else f"({s})"


def to_text(e: Expr) -> str:
    """Render an expression in the grammar accepted by :func:`parse`."""

    def wrap(child: Expr, need: bool) -> str:
        s = to_text(child)
        return f"({s})" if need else s

    if isinstance(e, Const):
        return _num(e.value)
    if isinstance(e, Var):
        return f"{e.side}{e.index}"
    if isinstance(e, Norm):
        return f"|{e.side}|"
    if isinstance(e, Bracket):
        return f"<{e.side}>"
    if isinstance(e, (Add, Sub)):
        op = "+" if isinstance(e, Add) else "-"
        return f"{wrap(e.left, e.left.prec < 1)} {op} {wrap(e.right, e.right.prec <= 1)}"
    if isinstance(e, (Mul, Div)):
        op = "*" if isinstance(e, Mul) else "/"
        return f"{wrap(e.left, e.left.prec < 2)} {op} {wrap(e.right, e.right.prec <= 2)}"
    if isinstance(e, Neg):
        # a negated literal would otherwise re-parse as a negative constant
        return "-" + wrap(e.arg, e.arg.prec < 3 or isinstance(e.arg, Const))
    if isinstance(e, Pow):
        p = e.exponent
        ptxt = repr(p) if p >= 0 else f"({p!r})"
        return f"{wrap(e.base, e.base.prec <= 4)}^{ptxt}"
    if isinstance(e, Log):
        return f"log({to_text(e.arg)})"
    if isinstance(e, Exp):
        return f"exp({to_text(e.arg)})"
    raise TypeError(f"unknown node {e!r}")


# -- parsing --------------------------------------------------------------------

_TOKEN = re.compile(
    r"""(?P<ws>\s+)
      |(?P<num>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)
      |(?P<abs>\|xi\||\|x\|)
      |(?P<br><xi>|<x>)
      |(?P<id>[A-Za-z_][A-Za-z_0-9]*)
      |(?P<op>[-+*/^(),])""",
    re.VERBOSE,
)

_FUNCS = {"log": Log, "exp": Exp}


@dataclass
class _Tok:
    kind: str
    text: str
    offset: int  # byte offset


@dataclass
class _Parser:
    text: str
    n: int | None
    toks: list = field(default_factory=list)
    pos: int = 0

    def __post_init__(self):
        i = 0
        b = 0
        while i < len(self.text):
            m = _TOKEN.match(self.text, i)
            if m is None:
                raise ParseError(f"unexpected character {self.text[i]!r}", b)
            if m.lastgroup != "ws":
                self.toks.append(_Tok(m.lastgroup, m.group(), b))
            b += len(m.group().encode("utf-8"))
            i = m.end()
        self.toks.append(_Tok("end", "", b))

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def take(self) -> _Tok:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, text: str) -> _Tok:
        t = self.take()
        if t.text != text:
            found = repr(t.text) if t.kind != "end" else "end of input"
            raise ParseError(f"expected {text!r}, found {found}", t.offset)
        return t

    def parse(self) -> Expr:
        e = self.expr()
        t = self.peek()
        if t.kind != "end":
            raise ParseError(f"unexpected token {t.text!r}", t.offset)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek().text in ("+", "-"):
            op = self.take().text
            r = self.term()
            e = Add(e, r) if op == "+" else Sub(e, r)
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.peek().text in ("*", "/"):
            op = self.take().text
            r = self.unary()
            e = Mul(e, r) if op == "*" else Div(e, r)
        return e

    def unary(self) -> Expr:
        if self.peek().text == "-":
            self.take()
            t = self.peek()
            inner = self.unary()
            # fold a bare negative literal, keep -(c) and -c^p structural
            if t.kind == "num" and isinstance(inner, Const):
                return Const(-inner.value)
            return Neg(inner)
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        if self.peek().text == "^":
            self.take()
            base = Pow(base, self.exponent())
            if self.peek().text == "^":
                t = self.peek()
                raise ParseError("chained powers need parentheses", t.offset)
        return base

    def exponent(self) -> float:
        t = self.peek()
        if t.kind == "num":
            self.take()
            return float(t.text)
        if t.text == "-" and self.toks[self.pos + 1].kind == "num":
            self.take()
            return -float(self.take().text)
        if t.text == "(":
            self.take()
            e = self.expr()
            self.expect(")")
            if depends_on(e, X) or depends_on(e, XI):
                raise ParseError("exponent must be constant", t.offset)
            try:
                return float(evaluate(e, (), ()))
            except DomainError as exc:
                raise ParseError(f"exponent not evaluable: {exc}", t.offset) from None
        raise ParseError(f"expected exponent, found {t.text or 'end of input'!r}", t.offset)

    def primary(self) -> Expr:
        t = self.take()
        if t.kind == "num":
            return Const(float(t.text))
        if t.kind == "abs":
            return Norm(XI if "xi" in t.text else X)
        if t.kind == "br":
            return Bracket(XI if "xi" in t.text else X)
        if t.kind == "id":
            if t.text in _FUNCS:
                self.expect("(")
                args = [self.expr()]
                while self.peek().text == ",":
                    self.take()
                    args.append(self.expr())
                self.expect(")")
                if len(args) != 1:
                    raise ArityError(
                        f"{t.text}() takes 1 argument, got {len(args)}", t.offset)
                return _FUNCS[t.text](args[0])
            m = re.fullmatch(r"(xi|x)([1-9][0-9]*)", t.text)
            if m is None:
                raise UnknownIdentifierError(f"unknown identifier {t.text!r}", t.offset)
            idx = int(m.group(2))
            if self.n is not None and idx > self.n:
                raise UnknownIdentifierError(
                    f"variable {t.text!r} exceeds dimension {self.n}", t.offset)
            return Var(m.group(1), idx)
        if t.text == "(":
            e = self.expr()
            self.expect(")")
            return e
        found = repr(t.text) if t.kind != "end" else "end of input"
        raise ParseError(f"unexpected {found}", t.offset)


def parse(text: str, n: int | None = None) -> Expr:
    """Parse expression text.

    Parameters
    ----------
    text : str
        Source in the grammar described in the module docstring.
    n : int, optional
        Declared dimension; variables with larger index are rejected.

    Raises
    ------
    ParseError
        With ``offset`` set to the byte offset of the offending token.
    """
    return _Parser(text, n).parse()


# -- evaluation -----------------------------------------------------------------

def evaluate(e: Expr, x: Sequence, xi: Sequence):
    """Evaluate ``e`` at ``(x, xi)``.

    ``x`` and ``xi`` are sequences of coordinates; each coordinate may be a
    scalar or an array, and arrays broadcast against one another.

    Raises
    ------
    DomainError
        On division by zero, log of a non-positive value, or a non-integer
        power of a non-positive base. The offending node is attached.
    """
    x = tuple(np.asarray(c, dtype=float) for c in x)
    xi = tuple(np.asarray(c, dtype=float) for c in xi)
    cache: dict = {}
    with np.errstate(all="ignore"):
        out = _eval(e, x, xi, cache)
    return float(out) if np.ndim(out) == 0 else out


def _eval(e: Expr, x, xi, cache):
    if isinstance(e, Const):
        return np.float64(e.value)
    if isinstance(e, Var):
        coords = x if e.side == X else xi
        if e.index > len(coords):
            raise DomainError(f"variable {to_text(e)} outside dimension {len(coords)}", e)
        return coords[e.index - 1]
    if isinstance(e, (Norm, Bracket)):
        key = (type(e), e.side)
        if key not in cache:
            coords = x if e.side == X else xi
            r2 = sum((np.square(c) for c in coords), np.float64(0.0))
            cache[key] = np.sqrt(r2 + 1.0) if isinstance(e, Bracket) else np.sqrt(r2)
        return cache[key]
    if isinstance(e, Add):
        return _eval(e.left, x, xi, cache) + _eval(e.right, x, xi, cache)
    if isinstance(e, Sub):
        return _eval(e.left, x, xi, cache) - _eval(e.right, x, xi, cache)
    if isinstance(e, Mul):
        return _eval(e.left, x, xi, cache) * _eval(e.right, x, xi, cache)
    if isinstance(e, Div):
        den = _eval(e.right, x, xi, cache)
        if np.any(den == 0):
            raise DomainError(f"division by zero in {to_text(e)}", e)
        return _eval(e.left, x, xi, cache) / den
    if isinstance(e, Neg):
        return -_eval(e.arg, x, xi, cache)
    if isinstance(e, Pow):
        b = _eval(e.base, x, xi, cache)
        p = e.exponent
        if float(p).is_integer():
            if p < 0 and np.any(b == 0):
                raise DomainError(f"zero raised to a negative power in {to_text(e)}", e)
            return b ** int(p) if abs(p) < 2**31 else b ** p
        if np.any(b <= 0):
            raise DomainError(f"non-integer power of a non-positive base in {to_text(e)}", e)
        return b ** p
    if isinstance(e, Log):
        a = _eval(e.arg, x, xi, cache)
        if np.any(a <= 0):
            raise DomainError(f"log of a non-positive value in {to_text(e)}", e)
        return np.log(a)
    if isinstance(e, Exp):
        return np.exp(_eval(e.arg, x, xi, cache))
    raise TypeError(f"unknown node {e!r}")


# -- analysis -------------------------------------------------------------------

def depends_on(e: Expr, side: str, index: int | None = None) -> bool:
    """Whether ``e`` involves variables of ``side`` (optionally one index)."""
    return _depends(e, side, index)


def _depends(e, side, index):
    if isinstance(e, Const):
        return False
    if isinstance(e, Var):
        return e.side == side and (index is None or e.index == index)
    if isinstance(e, (Norm, Bracket)):
        return e.side == side
    if isinstance(e, (Add, Sub, Mul, Div)):
        return _depends(e.left, side, index) or _depends(e.right, side, index)
    if isinstance(e, (Neg, Log, Exp)):
        return _depends(e.arg, side, index)
    if isinstance(e, Pow):
        return _depends(e.base, side, index)
    raise TypeError(f"unknown node {e!r}")


def differentiate(e: Expr, v: Var | str) -> Expr:
    """Exact partial derivative of ``e`` with respect to the variable ``v``."""
    if isinstance(v, str):
        v = var(v)
    return _diff(e, v)


def _diff(e: Expr, v: Var) -> Expr:
    if not _depends(e, v.side, v.index):
        return ZERO
    if isinstance(e, Var):
        return ONE
    if isinstance(e, (Norm, Bracket)):
        return div(Var(v.side, v.index), e)
    if isinstance(e, Add):
        return add(_diff(e.left, v), _diff(e.right, v))
    if isinstance(e, Sub):
        return sub(_diff(e.left, v), _diff(e.right, v))
    if isinstance(e, Mul):
        return add(mul(_diff(e.left, v), e.right), mul(e.left, _diff(e.right, v)))
    if isinstance(e, Div):
        da, db = _diff(e.left, v), _diff(e.right, v)
        first = div(da, e.right)
        if _is_const(db, 0.0):
            return first
        return sub(first, div(mul(e.left, db), power(e.right, 2.0)))
    if isinstance(e, Neg):
        return neg(_diff(e.arg, v))
    if isinstance(e, Pow):
        p = e.exponent
        return mul(mul(Const(p), power(e.base, p - 1.0)), _diff(e.base, v))
    if isinstance(e, Log):
        return div(_diff(e.arg, v), e.arg)
    if isinstance(e, Exp):
        return mul(e, _diff(e.arg, v))
    raise TypeError(f"unknown node {e!r}")


_ANY = "any"  # degree of the zero expression


def infer_degree(e: Expr, side: str) -> float | None:
    """Structural homogeneity degree of ``e`` in the ``side`` variables.

    Returns ``None`` when the tree is not recognisably homogeneous (``<x>``,
    log or exp of a non-constant argument, sums of unequal degrees). The
    zero constant is homogeneous of every degree and reports ``0.0`` at top
    level.
    """
    d = _deg(e, side)
    if d == _ANY:
        return 0.0
    return d


def _deg(e, side):
    if isinstance(e, Const):
        return _ANY if e.value == 0.0 else 0.0
    if not _depends(e, side, None):
        return 0.0
    if isinstance(e, (Var, Norm)):
        return 1.0
    if isinstance(e, Bracket):
        return None
    if isinstance(e, (Add, Sub)):
        a, b = _deg(e.left, side), _deg(e.right, side)
        if a is None or b is None:
            return None
        if a == _ANY:
            return b
        if b == _ANY or a == b:
            return a
        return None
    if isinstance(e, (Mul, Div)):
        a, b = _deg(e.left, side), _deg(e.right, side)
        if a == _ANY or (b == _ANY and isinstance(e, Mul)):
            return _ANY
        if a is None or b is None or b == _ANY:
            return None
        return a + b if isinstance(e, Mul) else a - b
    if isinstance(e, Neg):
        return _deg(e.arg, side)
    if isinstance(e, Pow):
        a = _deg(e.base, side)
        if a is None:
            return None
        return _ANY if a == _ANY else a * e.exponent
    if isinstance(e, (Log, Exp)):
        return 0.0 if _deg(e.arg, side) == 0.0 else None
    raise TypeError(f"unknown node {e!r}")


# -- homogeneous expansion at infinity ------------------------------------------

def _scaled(e, side, theta, other, eps):
    """Value of ``e`` at ``side = theta/eps`` written as ``eps**(-d) * g``.

    Returns ``(g, d)``, where ``g`` is an analytic function of ``eps`` near 0
    (``eps`` may be complex), or ``None`` for the zero expression.
    """
    if isinstance(e, Const):
        return None if e.value == 0.0 else (np.complex128(e.value), 0.0)
    if not _depends(e, side, None):
        xs = other if side == XI else theta
        xis = theta if side == XI else other
        val = _eval(e, xs, xis, {})
        return (np.asarray(val, dtype=complex), 0.0)
    if isinstance(e, Var):
        return (np.asarray(theta[e.index - 1], dtype=complex), 1.0)
    if isinstance(e, Norm):
        return (np.sqrt(sum(np.square(c) for c in theta)).astype(complex), 1.0)
    if isinstance(e, Bracket):
        return (np.sqrt(sum(np.square(c) for c in theta) + np.square(eps)), 1.0)
    if isinstance(e, (Add, Sub)):
        a = _scaled(e.left, side, theta, other, eps)
        b = _scaled(e.right, side, theta, other, eps)
        sign = 1.0 if isinstance(e, Add) else -1.0
        if b is None:
            return a
        if a is None:
            return (sign * b[0], b[1])
        (g1, d1), (g2, d2) = a, b
        gap = d1 - d2
        if gap != round(gap):
            raise DomainError(f"non-integer degree gap in {to_text(e)}", e)
        gap = int(round(gap))
        if gap >= 0:
            return (g1 + sign * eps ** gap * g2, d1)
        return (eps ** (-gap) * g1 + sign * g2, d2)
    if isinstance(e, Mul):
        a = _scaled(e.left, side, theta, other, eps)
        b = _scaled(e.right, side, theta, other, eps)
        if a is None or b is None:
            return None
        return (a[0] * b[0], a[1] + b[1])
    if isinstance(e, Div):
        a = _scaled(e.left, side, theta, other, eps)
        b = _scaled(e.right, side, theta, other, eps)
        if b is None:
            raise DomainError(f"division by zero in {to_text(e)}", e)
        if a is None:
            return None
        return (a[0] / b[0], a[1] - b[1])
    if isinstance(e, Neg):
        a = _scaled(e.arg, side, theta, other, eps)
        return None if a is None else (-a[0], a[1])
    if isinstance(e, Pow):
        a = _scaled(e.base, side, theta, other, eps)
        p = e.exponent
        if a is None:
            if p > 0:
                return None
            raise DomainError(f"zero raised to a non-positive power in {to_text(e)}", e)
        g = a[0] ** int(p) if float(p).is_integer() else np.power(a[0], p)
        return (g, a[1] * p)
    if isinstance(e, Log):
        a = _scaled(e.arg, side, theta, other, eps)
        if a is None or a[1] != 0.0:
            raise DomainError(f"log of a non-degree-0 argument is not classical: {to_text(e)}", e)
        return (np.log(a[0]), 0.0)
    if isinstance(e, Exp):
        a = _scaled(e.arg, side, theta, other, eps)
        if a is None:
            return (np.complex128(1.0), 0.0)
        if a[1] > 0 or a[1] != round(a[1]):
            raise DomainError(f"exp of a growing argument is not classical: {to_text(e)}", e)
        return (np.exp(eps ** int(round(-a[1])) * a[0]), 0.0)
    raise TypeError(f"unknown node {e!r}")


def expansion_coefficients(e: Expr, side: str, degree: float, count: int,
                           theta: Sequence, other: Sequence,
                           radius: float = 0.5, nodes: int = 64):
    """Homogeneous expansion of ``e`` at infinity in the ``side`` variables.

    Computes ``c_0..c_{count-1}`` with
    ``e(theta/eps, other) ~ sum_k c_k(theta, other) eps**(k - degree)``
    for unit vectors ``theta``; ``c_k`` is the value on the sphere of the
    degree ``degree - k`` homogeneous term. The Taylor coefficients are
    read off a trapezoidal Cauchy integral on ``|eps| = radius``.

    Returns
    -------
    coeffs : ndarray, shape (count,) + sample shape
    excess : float
        Largest magnitude of any term of degree above ``degree``; nonzero
        means ``e`` grows faster than declared.
    """
    theta = tuple(np.asarray(c, dtype=float)[..., None] for c in theta)
    other = tuple(np.asarray(c, dtype=float)[..., None] for c in other)
    eps = radius * np.exp(2j * np.pi * np.arange(nodes) / nodes)
    with np.errstate(all="ignore"):
        r = _scaled(e, side, theta, other, eps)
    shape = np.broadcast(*theta, *other, eps).shape[:-1]
    if r is None:
        return np.zeros((count,) + shape), 0.0
    g, d = r
    g = np.broadcast_to(g, shape + (nodes,))
    if not np.all(np.isfinite(g)):
        raise DomainError(f"expansion of {to_text(e)} is singular on the sampled sphere", e)
    s = float(degree) - d
    if abs(s - round(s)) > 1e-12:
        raise DomainError(f"{to_text(e)} has degree offset {s:g} from {float(degree):g}", e)
    s = int(round(s))
    a = np.fft.fft(g, axis=-1) / nodes
    a = a * radius ** (-np.arange(nodes, dtype=float))
    a = np.moveaxis(a.real, -1, 0)
    out = np.zeros((count,) + shape)
    for k in range(count):
        i = k - s
        if 0 <= i < nodes // 2:
            out[k] = a[i]
    excess = float(np.max(np.abs(a[:max(0, -s)]))) if s < 0 else 0.0
    return out, excess
