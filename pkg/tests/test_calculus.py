import math

import numpy as np
import pytest

from sgres import expr as ex
from sgres.calculus import (
    Sector, check_ellipticity, check_lambda_ellipticity, compose, leibniz_corner, leibniz_e,
    leibniz_psi, make_triple, power_leading_triple,
)
from sgres.errors import BranchError, MissingComponentError
from sgres.presets import affine_factor, preset_symbol, separable_symbol
from sgres.symbol import make_symbol, principal_triple, sample_directions

LEFT = Sector(math.pi, math.pi / 4)


def _bisphere_points(n, count, seed):
    rng = np.random.default_rng(seed)
    return tuple(sample_directions(n, count, rng).T), tuple(sample_directions(n, count, rng).T)


def _random_pair(seed):
    rng = np.random.default_rng(seed)
    c = rng.uniform(0.5, 2.0, (2, 6))
    return [separable_symbol(affine_factor("x", *v[:3]), affine_factor("xi", *v[3:])) for v in c]


def test_leading_product_of_monomials():
    a, b = preset_symbol("monomial_xi"), preset_symbol("monomial_x")
    c = leibniz_corner(a, b, 0, 0)
    assert c.evaluate((2.0,), (3.0,)) == 6.0


def test_first_leibniz_term_of_monomials():
    a, b = preset_symbol("monomial_xi"), preset_symbol("monomial_x")
    c = leibniz_corner(a, b, 1, 1)
    assert complex(c.evaluate((2.0,), (3.0,))) == -1j
    assert leibniz_corner(b, a, 1, 1).is_zero or leibniz_corner(b, a, 1, 1).evaluate((2.0,), (3.0,)) == 0


def test_composition_with_identity():
    a = preset_symbol("m1")
    one = make_symbol(1, (0, 0), {0: "1"}, {0: "1"}, {(0, 0): "1"}, depths=(4, 4))
    x, xi = (np.array([0.7, -1.3]),), (np.array([2.0, -0.4]),)
    for j in range(4):
        for k in range(4):
            got = leibniz_corner(a, one, j, k).evaluate(x, xi)
            want = a.corner_component(j, k).evaluate(x, xi)
            np.testing.assert_allclose(got, want, rtol=1e-15, atol=0)


def test_leading_corner_is_product():
    a, b = _random_pair(1)
    x, xi = _bisphere_points(1, 50, 2)
    got = leibniz_corner(a, b, 0, 0).evaluate(x, xi)
    want = a.corner[(0, 0)].evaluate(x, xi) * b.corner[(0, 0)].evaluate(x, xi)
    np.testing.assert_array_equal(got, want)


def test_leading_associativity():
    a, b = _random_pair(3)
    c, _ = _random_pair(4)
    left = compose(compose(a, b), c)
    right = compose(a, compose(b, c))
    x, xi = _bisphere_points(1, 50, 5)
    np.testing.assert_allclose(left.corner[(0, 0)].evaluate(x, xi),
                               right.corner[(0, 0)].evaluate(x, xi), rtol=1e-12)


def test_psi_expansion_consistent_with_corners():
    a, b = _random_pair(6)
    # the xi-component j of a#b has x-expansion given by its corners (j, k)
    big = 1e3
    for j in range(2):
        psi = leibniz_psi(a, b, j)
        x = np.array([big, -big])
        xi = np.array([0.8, -1.1])
        v = psi.evaluate((x,), (xi,))
        approx = sum(leibniz_corner(a, b, j, k).evaluate((x,), (xi,)) for k in range(4))
        np.testing.assert_allclose(v, approx, rtol=1e-10)
    for k in range(2):
        ek = leibniz_e(a, b, k)
        x = np.array([0.9, -1.2])
        xi = np.array([big, -big])
        approx = sum(leibniz_corner(a, b, j, k).evaluate((x,), (xi,)) for j in range(4))
        np.testing.assert_allclose(ek.evaluate((x,), (xi,)), approx, rtol=1e-10)


def test_missing_component_in_composition():
    a = preset_symbol("inv_bracket")
    with pytest.raises(MissingComponentError):
        leibniz_corner(a, a, 1, 1)


def test_integer_power_of_constant_triple():
    t = make_triple(1, (0, 0), "2", "3", "-4")
    p = power_leading_triple(t, 2)
    vals = [c.evaluate((1.0,), (1.0,)) for c in (p.sigma_psi, p.sigma_e, p.sigma_psie)]
    assert vals == [4.0, 9.0, 16.0]


def test_m1_inverse_square_root_triple():
    t = principal_triple(preset_symbol("m1"))
    p = power_leading_triple(t, -0.5)
    assert (p.order.m1, p.order.m2) == (-1, -1)
    rng = np.random.default_rng(9)
    x = (rng.uniform(-5, 5, 50),)
    xi = (rng.choice([-1.0, 1.0], 50) * rng.uniform(0.2, 5, 50),)
    np.testing.assert_allclose(p.sigma_psi.evaluate(x, xi),
                               1 / (np.sqrt(1 + x[0] ** 2) * np.abs(xi[0])), rtol=1e-14)
    np.testing.assert_allclose(p.sigma_e.evaluate(x, xi),
                               (x[0] ** 2 * (1 + xi[0] ** 2)) ** -0.5, rtol=1e-14)
    np.testing.assert_allclose(p.sigma_psie.evaluate(x, xi),
                               1 / np.abs(x[0] * xi[0]), rtol=1e-14)


def test_power_one_is_identity():
    t = principal_triple(preset_symbol("m1"))
    assert power_leading_triple(t, 1) is t


def test_power_semigroup():
    t = principal_triple(preset_symbol("m1_quartic"))
    x, xi = _bisphere_points(1, 50, 10)
    x = (x[0] * 3.7,)
    for z, s in ((-0.5, -0.25), (0.3, 1.2), (2, -0.75)):
        pz, ps, pzs = (power_leading_triple(t, v) for v in (z, s, z + s))
        for name in ("sigma_psi", "sigma_e", "sigma_psie"):
            lhs = getattr(pz, name).evaluate(x, xi) * getattr(ps, name).evaluate(x, xi)
            rhs = getattr(pzs, name).evaluate(x, xi)
            np.testing.assert_allclose(lhs, rhs, rtol=1e-12)


def test_branch_violation():
    t = make_triple(1, (1, 1), "x1*xi1", "x1*xi1", "x1*xi1")
    with pytest.raises(BranchError):
        power_leading_triple(t, 0.5)
    with pytest.raises(BranchError):
        power_leading_triple(t, 0.5 + 1j)


def test_m1_is_elliptic_with_unit_margin():
    rep = check_ellipticity(principal_triple(preset_symbol("m1")))
    assert rep.verdict == "sample-pass"
    assert rep.margin >= 1.0 - 1e-12


def test_sign_corner_is_elliptic():
    # sigma_psie = theta' theta takes the values +-1 on the bi-sphere
    t = make_triple(1, (0, 0), "1", "1", "x1*xi1/(|x|*|xi|)")
    rep = check_ellipticity(t)
    assert rep.passed and rep.margin == pytest.approx(1.0)


def test_vanishing_corner_certified_fail():
    t = make_triple(2, (0, 0), "1", "1", "x1*xi1/(|x|*|xi|)")
    rep = check_ellipticity(t)
    assert rep.verdict == "certified-fail"
    w = rep.witness
    assert w["component"] == "sigma_psie"
    assert abs(w["x"][0] * w["xi"][0]) < 1e-12


@pytest.mark.parametrize("zero", ["x1 - 1", "xi1", "x1*xi1 - |x|*|xi|"])
def test_seeded_zeros_fail(zero):
    base = ex.parse("<x>^2*<xi>^2")
    z = ex.parse(zero)
    t = make_triple(1, (0, 0), ex.mul(base, z), ex.mul(base, z), ex.mul(base, z))
    assert check_ellipticity(t).verdict == "certified-fail"


def test_m1_lambda_elliptic_for_left_sector():
    rep = check_lambda_ellipticity(principal_triple(preset_symbol("m1")), LEFT)
    assert rep.verdict == "sample-pass"


def test_negative_corner_hits_left_sector():
    t = make_triple(1, (0, 0), "1", "1", "-1")
    rep = check_lambda_ellipticity(t, LEFT)
    assert rep.verdict == "certified-fail"
    assert rep.witness["lambda"] == [-1.0, 0.0]


def test_positive_symbol_hits_right_sector():
    t = make_triple(1, (2, 0), "|xi|^2", "|xi|^2", "|xi|^2")
    rep = check_lambda_ellipticity(t, Sector(0.0, math.pi / 8))
    assert rep.verdict == "certified-fail"
    assert rep.witness["component"] == "sigma_psi"


def test_sector_validation():
    with pytest.raises(ValueError):
        Sector(0.0, math.pi)
    s = Sector(math.pi, math.pi / 4)
    assert s.contains(-1.0) and not s.contains(1.0)
    assert s.contains(np.exp(1j * (math.pi - math.pi / 4)))
    assert s.distance(1.0) == pytest.approx(1.0)
