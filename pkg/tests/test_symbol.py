import numpy as np
import pytest

from sgres import expr as ex
from sgres.errors import CompatibilityError, HomogeneityError, MissingComponentError
from sgres.presets import list_presets, preset_symbol
from sgres.symbol import (
    Component, Excision, OrderPair, compactify, evaluate_symbol, make_symbol, principal_triple,
    sample_directions, smooth_step,
)


def test_order_pair_integer_flag():
    assert OrderPair(2, 2).is_integer
    assert not OrderPair(0.5, 2).is_integer
    assert OrderPair(1, 2).scaled(-0.5) == OrderPair(-0.5, -1)


def test_m1_leading_data_is_valid():
    s = make_symbol(1, (2, 2), {0: "<x>^2*xi1^2"}, {0: "|x|^2*(1+xi1^2)"},
                    {(0, 0): "|x|^2*xi1^2"})
    assert s.depths == (4, 4)


def test_monomial_symbol_is_valid():
    s = make_symbol(1, (1, 1), {0: "x1*xi1"}, {0: "x1*xi1"}, {(0, 0): "x1*xi1"})
    t = principal_triple(s)
    assert t.sigma_psi == t.sigma_e == t.sigma_psie == Component(ex.parse("x1*xi1"))


def test_monomial_with_mismatched_degrees_is_rejected():
    # psi[0] = xi1 has no x-degree-1 part, so it cannot match corner (0, 0)
    with pytest.raises(CompatibilityError):
        make_symbol(1, (1, 1), {0: "xi1"}, {0: "x1"}, {(0, 0): "x1*xi1"})


def test_homogeneity_violation_reports_degree():
    with pytest.raises(HomogeneityError) as info:
        make_symbol(1, (2, 0), {0: "<xi>^2"}, {0: "<xi>^2"}, {(0, 0): "xi1^2"})
    assert info.value.component == "psi[0]"


def test_sampled_degree_mismatch():
    with pytest.raises(HomogeneityError) as info:
        make_symbol(1, (3, 0), {0: "xi1^2"}, {0: "xi1^2"}, {(0, 0): "xi1^2"})
    assert info.value.measured_degree == pytest.approx(2.0)


def test_compatibility_violation_names_index():
    with pytest.raises(CompatibilityError) as info:
        make_symbol(1, (1, 1), {0: "x1*xi1"}, {0: "x1*xi1"}, {(0, 0): "2*x1*xi1"})
    assert info.value.index == (0, 0)
    assert info.value.deviation > 0.5


def test_missing_subleading_corner_is_incompatible():
    # <x>^2 xi1^2 has the x-degree-0 part xi1^2, which must appear as corner (0, 2)
    with pytest.raises(CompatibilityError):
        make_symbol(1, (2, 2), {0: "<x>^2*xi1^2"}, {0: "x1^2*(1+xi1^2)", 2: "xi1^2"},
                    {(0, 0): "x1^2*xi1^2"})


def test_components_beyond_depth_raise():
    s = preset_symbol("m1")
    assert s.psi_component(3).is_zero
    with pytest.raises(MissingComponentError):
        s.psi_component(4)
    with pytest.raises(MissingComponentError):
        s.corner_component(0, 4)


@pytest.mark.parametrize("name", list_presets())
def test_presets_validate(name):
    s = preset_symbol(name)
    assert s.name == name


@pytest.mark.parametrize("name", list_presets())
def test_corner_bihomogeneity(name):
    s = preset_symbol(name)
    rng = np.random.default_rng(3)
    x = sample_directions(s.n, 100, rng) * rng.uniform(0.5, 2.0, (100, 1))
    xi = sample_directions(s.n, 100, rng) * rng.uniform(0.5, 2.0, (100, 1))
    for (j, k), c in s.corner.items():
        base = c.evaluate(tuple(x.T), tuple(xi.T))
        for sx in (2.0, 5.0):
            for txi in (2.0, 5.0):
                v = c.evaluate(tuple((sx * x).T), tuple((txi * xi).T))
                expect = sx ** float(s.e_degree(k)) * txi ** float(s.psi_degree(j)) * base
                np.testing.assert_allclose(v, expect, rtol=1e-10, atol=0)


def test_triple_roundtrip():
    s = preset_symbol("m1")
    t = principal_triple(s)
    assert (t.sigma_psi, t.sigma_e, t.sigma_psie) == (s.psi[0], s.e[0], s.corner[(0, 0)])


def test_m1_triple_values():
    t = principal_triple(preset_symbol("m1"))
    x, xi = (np.array([0.3, -2.0]),), (np.array([1.5, 0.7]),)
    np.testing.assert_allclose(t.sigma_psi.evaluate(x, xi), (1 + x[0] ** 2) * xi[0] ** 2)
    np.testing.assert_allclose(t.sigma_e.evaluate(x, xi), x[0] ** 2 * (1 + xi[0] ** 2))
    np.testing.assert_allclose(t.sigma_psie.evaluate(x, xi), x[0] ** 2 * xi[0] ** 2)


def test_triple_needs_corner():
    s = make_symbol(1, (1, 1), {0: "x1*xi1"}, {0: "x1*xi1"}, {}, validate=False)
    with pytest.raises(MissingComponentError):
        principal_triple(s)


def test_smooth_step_and_excision():
    assert smooth_step(0.0) == 0.0 and smooth_step(1.0) == 1.0
    assert smooth_step(0.5) == pytest.approx(0.5)
    w = Excision()
    assert w((np.array([0.5]),)) == 0.0
    assert w((np.array([1.0]),)) == 1.0
    t = np.linspace(0, 1, 101)
    assert np.all(np.diff(smooth_step(t)) >= 0)


def test_evaluate_m1_large_xi():
    s = preset_symbol("m1")
    xi = 1e4
    v = evaluate_symbol(s, (0.0,), (xi,))
    assert abs(v) == pytest.approx(xi ** 2, rel=1e-7)


def test_evaluate_truncated_dead_zone():
    s = make_symbol(1, (1, 0), {0: "xi1"}, {}, {}, validate=False)
    assert evaluate_symbol(s, (3.0,), (0.4,)) == 0.0


def test_evaluate_monomial_product():
    s = make_symbol(1, (1, 1), {0: "x1*xi1"}, {0: "x1*xi1"}, {(0, 0): "x1*xi1"})
    assert evaluate_symbol(s, (2.0,), (3.0,)) == 6.0


def test_glued_expansion_matches_full_symbol():
    s = preset_symbol("m1")
    trunc = make_symbol(1, (2, 2), s.psi, s.e, s.corner, depths=s.depths, full=None)
    x = np.array([5.0, 20.0, -50.0])
    xi = np.array([30.0, -7.0, 100.0])
    exact = evaluate_symbol(s, (x,), (xi,))
    glued = evaluate_symbol(trunc, (x,), (xi,))
    # the remainder is of order <x>^-2 <xi>^-2 relative to the leading term
    rel = np.abs(glued - exact) / np.abs(exact)
    assert np.all(rel < 10.0 / ((1 + x * x) * (1 + xi * xi)))


def test_compactify_identity_and_limits():
    one = make_symbol(1, (0, 0), {0: "1"}, {0: "1"}, {(0, 0): "1"}, full="1")
    pts = np.array([[0.0], [0.5], [0.9]])
    np.testing.assert_array_equal(compactify(one, pts, pts[::-1]), 1.0)
    s = make_symbol(1, (1, 1), {0: "<x>*|xi|"}, {0: "|x|*<xi>"}, {(0, 0): "|x|*|xi|"},
                    full="<x>*<xi>", validate=False)
    assert compactify(s, [0.0], [0.0]) == pytest.approx(4.0 / 9.0, rel=1e-14)
    r = 1 - 2.0 ** -20
    assert compactify(s, [r], [-r]) == pytest.approx(1.0, rel=1e-5)


def test_compactify_rejects_boundary():
    s = preset_symbol("m1")
    with pytest.raises(ValueError):
        compactify(s, [1.0], [0.0])


@pytest.mark.parametrize("name", ["m1", "m1_quartic", "inv_bracket", "corner_constant_n2"])
def test_compactify_bounded_near_boundary(name):
    s = preset_symbol(name)
    r = np.linspace(0.0, 1 - 2.0 ** -12, 40)
    if s.n == 1:
        y = np.concatenate([-r, r])[:, None]
    else:
        ang = np.linspace(0, 2 * np.pi, 7)
        y = (r[:, None, None] * np.stack([np.cos(ang), np.sin(ang)], -1)[None]).reshape(-1, 2)
    Y, E = np.repeat(y, len(y), 0), np.tile(y, (len(y), 1))
    v = np.abs(compactify(s, Y, E))
    assert np.all(np.isfinite(v)) and v.max() < 1e3
