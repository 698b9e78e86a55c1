import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sgres import expr as ex
from sgres.errors import ArityError, DomainError, ParseError, UnknownIdentifierError


def test_parse_product_of_powers():
    e = ex.parse("<x>^2 * xi1^2")
    assert e == ex.Mul(ex.Pow(ex.Bracket("x"), 2.0), ex.Pow(ex.Var("xi", 1), 2.0))


def test_parse_quotient():
    e = ex.parse("1/(|x|*|xi|)")
    assert e == ex.Div(ex.Const(1.0), ex.Mul(ex.Norm("x"), ex.Norm("xi")))


def test_parse_error_offset():
    with pytest.raises(ParseError) as info:
        ex.parse("xi1^^2")
    assert info.value.offset == 4


@pytest.mark.parametrize("text", ["sin(x1)", "y1", "foo"])
def test_unknown_identifier(text):
    with pytest.raises(UnknownIdentifierError):
        ex.parse(text)


def test_arity_mismatch():
    with pytest.raises(ArityError):
        ex.parse("log(x1, x2)")


def test_dimension_bound():
    with pytest.raises(ParseError):
        ex.parse("x3", n=2)
    assert ex.parse("x2", n=2) == ex.Var("x", 2)


def test_evaluate_examples():
    assert ex.evaluate(ex.parse("<x>^2*<xi>^2"), (0.0,), (0.0,)) == 1.0
    assert ex.evaluate(ex.parse("1/(|x|*|xi|)"), (1.0,), (-1.0,)) == 1.0


def test_evaluate_domain_error_names_subexpression():
    with pytest.raises(DomainError) as info:
        ex.evaluate(ex.parse("1/|x|"), (0.0,), (0.0,))
    assert ex.to_text(info.value.subexpression) == ex.to_text(ex.parse("1/|x|"))
    with pytest.raises(DomainError):
        ex.evaluate(ex.parse("log(x1)"), (-1.0,), ())


def test_real_power_needs_positive_base():
    with pytest.raises(DomainError):
        ex.evaluate(ex.parse("x1^0.5"), (-1.0,), ())
    assert ex.evaluate(ex.parse("x1^3"), (-2.0,), ()) == -8.0


def test_evaluate_vectorized():
    x = np.linspace(-2, 2, 5)
    v = ex.evaluate(ex.parse("<x>^2"), (x,), ())
    np.testing.assert_allclose(v, 1 + x * x, rtol=1e-15)


def test_differentiate_examples():
    xi1, x1 = ex.var("xi1"), ex.var("x1")
    d = ex.differentiate(ex.parse("xi1^2"), xi1)
    assert ex.evaluate(d, (0.0,), (3.0,)) == 6.0
    assert ex.to_text(d) == "2.0 * xi1"
    assert ex.to_text(ex.differentiate(ex.parse("<x>"), x1)) == "x1 / <x>"
    assert ex.differentiate(ex.parse("5"), x1) == ex.ZERO


@pytest.mark.parametrize("text,side,deg", [
    ("|x|^2", "x", 2.0), ("x1*x2/|x|", "x", 1.0), ("<x>^2", "x", None),
    ("xi1^2*<x>", "xi", 2.0), ("x1 + x1^2", "x", None), ("log(|x|)", "x", None),
    ("<xi>^2", "x", 0.0), ("0", "x", "any"),
])
def test_infer_degree(text, side, deg):
    got = ex.infer_degree(ex.parse(text), side)
    if deg == "any":
        assert got is not None
    else:
        assert got == deg


# -- property tests ------------------------------------------------------------

_atoms = st.sampled_from(["x1", "x2", "xi1", "xi2", "|x|", "|xi|", "<x>", "<xi>", "2", "0.5"])


@st.composite
def expressions(draw, depth=3):
    if depth == 0 or draw(st.booleans()):
        return draw(_atoms)
    op = draw(st.sampled_from(["+", "-", "*", "/", "^", "log", "exp", "neg"]))
    a = draw(expressions(depth=depth - 1))
    if op == "^":
        return f"({a})^{draw(st.sampled_from(['2', '3', '-1', '0.5']))}"
    if op == "log":
        return f"log(<x> + ({a})^2)"
    if op == "exp":
        return f"exp(({a})/(1 + ({a})^2))"
    if op == "neg":
        return f"-({a})"
    b = draw(expressions(depth=depth - 1))
    return f"({a}) {op} ({b})"


@given(expressions())
def test_print_parse_roundtrip(text):
    e = ex.parse(text)
    assert ex.parse(ex.to_text(e)) == e


_homog = st.sampled_from(["xi1", "xi2", "|xi|", "xi1*xi2", "xi1^2"])
_coef = st.sampled_from(["<x>", "x1", "1", "2.5", "exp(x2)"])


@st.composite
def xi_homogeneous(draw):
    parts = [f"({draw(_coef)})*({draw(_homog)})^{draw(st.sampled_from(['1', '2', '-1']))}"
             for _ in range(draw(st.integers(1, 3)))]
    e = parts[0]
    for p in parts[1:]:
        e = f"({e})*({p})"
    return e


@given(xi_homogeneous())
def test_inferred_degree_is_certified_by_scaling(text):
    e = ex.parse(text)
    d = ex.infer_degree(e, "xi")
    assert d is not None
    rng = np.random.default_rng(7)
    x = tuple(rng.normal(size=100) for _ in range(2))
    th = rng.normal(size=(100, 2))
    th /= np.linalg.norm(th, axis=1, keepdims=True)
    # keep away from the zero set of the sampled monomials
    th = np.where(np.abs(th) < 0.05, 0.05, th)
    th /= np.linalg.norm(th, axis=1, keepdims=True)
    base = ex.evaluate(e, x, tuple(th.T))
    for t in (2.0, 5.0, 10.0):
        v = ex.evaluate(e, x, tuple((t * th).T))
        np.testing.assert_allclose(v, t ** d * base, rtol=1e-12, atol=0)


def _richardson(f, h=1e-5):
    d1 = (f(h) - f(-h)) / (2 * h)
    d2 = (f(h / 2) - f(-h / 2)) / h
    return (4 * d2 - d1) / 3


@given(expressions(), st.sampled_from(["x1", "x2", "xi1", "xi2"]))
def test_derivative_matches_finite_differences(text, name):
    e = ex.parse(text)
    v = ex.var(name)
    d = ex.differentiate(e, v)
    rng = np.random.default_rng(11)
    checked = 0
    for _ in range(20):
        x = list(rng.uniform(0.3, 1.7, 2) * rng.choice([-1, 1], 2))
        xi = list(rng.uniform(0.3, 1.7, 2) * rng.choice([-1, 1], 2))

        def f(h):
            xs, xis = list(x), list(xi)
            (xs if v.side == "x" else xis)[v.index - 1] += h
            return float(ex.evaluate(e, xs, xis))

        try:
            exact = float(ex.evaluate(d, x, xi))
            approx = _richardson(f)
        except DomainError:
            continue
        if not (math.isfinite(exact) and math.isfinite(approx)):
            continue
        scale = max(abs(exact), abs(f(0.0)), 1.0)
        if scale > 1e6:
            continue
        assert abs(exact - approx) <= 1e-7 * scale
        checked += 1
