import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from bernwidth import polyspace as ps
from bernwidth.indexgrid import kappa_of
from bernwidth.polyspace import GridFunction, PiecewisePoly
from bernwidth.quadrature import gauss01
from bernwidth.verify import BRACKET_RULE, norm_equivalence_spread


def test_legendre01_orthonormal():
    x, w = gauss01(8)
    v = ps.legendre01(x, 5)
    np.testing.assert_allclose(v.T @ (w[:, None] * v), np.eye(6), atol=1e-13)


def test_cell_basis_orthonormal_on_cell():
    kappa, l = (2, 1), (1, 2)
    lo = np.array([0.25, 0.5])
    x, w = gauss01(5)
    pts = np.array([[a, b] for a in x for b in x]) * [0.25, 0.5] + lo
    wts = np.outer(w, w).ravel() * 0.125
    cell = 1 * 2 + 1
    b = ps.cell_basis(pts, kappa, np.full(len(pts), cell), l)
    np.testing.assert_allclose(b.T @ (wts[:, None] * b), np.eye(6), atol=1e-12)


def test_piecewise_poly_is_immutable(rng):
    f = PiecewisePoly.random((1,), (1,), rng)
    with pytest.raises(AttributeError):
        f.kappa = (2,)
    with pytest.raises(ValueError):
        f.coeffs[0, 0] = 1.0


def test_arithmetic_aligns_levels(rng):
    f = PiecewisePoly.random((1, 0), (1, 1), rng)
    g = PiecewisePoly.random((0, 2), (1, 1), rng)
    h = 2.0 * f - g
    assert h.kappa == (1, 2)
    x = rng.random((500, 2))
    np.testing.assert_allclose(h(x), 2 * f(x) - g(x), atol=1e-12)
    np.testing.assert_allclose((-f)(x), -f(x))


def test_refine_is_exact(rng):
    f = PiecewisePoly.random((1,), (2,), rng)
    g = f.refine((4,))
    x = rng.random((1000, 1))
    np.testing.assert_allclose(f(x), g(x), atol=1e-12)
    with pytest.raises(ValueError):
        g.refine((1,))


def test_project_exact_to_constants_gives_cell_means():
    f = ps.iso_Ik_inverse(np.array([0.0, 1.0]), 1, (1,), (1.0,), 0)  # f(x) = x
    mean = ps.project_exact(f, (1,), (0,))
    np.testing.assert_allclose(mean(np.array([[0.1], [0.9]])), [0.25, 0.75], atol=1e-14)


def test_eval_single_point():
    f = PiecewisePoly((1,), (0,), [[2.0], [5.0]]) * (1 / math.sqrt(2))
    assert ps.eval(f, [0.75]) == pytest.approx(5.0 / math.sqrt(2) * math.sqrt(2))
    with pytest.raises(ValueError):
        ps.eval(f, [1.5])
    with pytest.raises(ValueError):
        ps.eval(f, [0.5, 0.5])


def test_lp_norm_l2_is_coefficient_norm(rng):
    for kappa, l in [((3,), (2,)), ((2, 1), (1, 1))]:
        f = PiecewisePoly.random(kappa, l, rng)
        assert ps.lp_norm(f, 2) == pytest.approx(f.l2_norm(), abs=1e-12)


@pytest.mark.parametrize("p", [1.0, 3.0])
def test_lp_norm_piecewise_against_scipy(rng, p):
    f = PiecewisePoly.random((2,), (2,), rng)
    ref = sum(
        integrate.quad(lambda t: abs(f(np.array([[t]]))[0]) ** p, a, a + 0.25, epsabs=1e-13, limit=200)[0]
        for a in (0, 0.25, 0.5, 0.75)
    ) ** (1 / p)
    assert ps.lp_norm(f, p) == pytest.approx(ref, rel=1e-7)


def test_lp_norm_sup_is_a_sampled_max():
    # true sup is 1 at (pi/6, 1); sampling can only approach it from below
    f = GridFunction(lambda x: np.sin(3 * x[:, 0]) * x[:, 1], 2)
    got = ps.lp_norm(f, math.inf)
    assert 1.0 - 1e-3 < got <= 1.0


def test_lp_norm_sup_piecewise_hits_vertices(rng):
    f = ps.iso_Ik_inverse(np.array([0.0, 1.0, -3.0, 2.0]), 1, (1,), (1.0,), 1)
    assert ps.lp_norm(f, math.inf) == pytest.approx(3.0, abs=1e-12)


def test_lp_norm_sees_narrow_negative_lobe():
    # 4(x - 0.2475)(x - 0.2525) on one cell: Gauss nodes miss the dip entirely
    coeffs = np.polynomial.polynomial.polyfromroots([0.2475, 0.2525]) * 4
    # single cell, literal interpolation nodes 0, 1, 2
    f = ps.iso_Ik_inverse(np.polynomial.polynomial.polyval(np.array([0.0, 1.0, 2.0]), coeffs), 1, (2,), (1.0,), 0)
    exact_pos = integrate.quad(lambda t: abs(np.polynomial.polynomial.polyval(t, coeffs)), 0, 1,
                               points=[0.2475, 0.2525], epsabs=1e-14)[0]
    assert ps.lp_norm(f, 1) == pytest.approx(exact_pos, rel=1e-8)


def test_lp_norm_on_box():
    one = GridFunction(lambda x: np.ones(len(x)), 1)
    assert ps.lp_norm(one, 1, box=([0.25], [0.75])) == pytest.approx(0.5)


def test_iso_examples():
    f = ps.iso_Ik_inverse(np.array([2.0, 5.0]), 1, (0,), (1.0,), 1)
    np.testing.assert_allclose(ps.iso_Ik(f, (1.0,), 1), [2.0, 5.0])
    one = ps.iso_Ik_inverse(np.ones(4), 2, (0, 0), (1.0, 1.0), 1)
    np.testing.assert_allclose(one(np.random.default_rng(0).random((50, 2))), 1.0)
    lin = ps.iso_Ik_inverse(np.array([0.0, 1.0]), 1, (1,), (1.0,), 0)
    x = np.linspace(0, 1, 11)[:, None]
    np.testing.assert_allclose(lin(x), x[:, 0], atol=1e-14)


def test_iso_rejects_wrong_level(rng):
    f = PiecewisePoly.random((2,), (0,), rng)
    with pytest.raises(ValueError):
        ps.iso_Ik(f, (1.0,), 1)
    with pytest.raises(ValueError):
        ps.iso_Ik_inverse(np.ones(3), 1, (0,), (1.0,), 1)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 4), st.sampled_from([(1.0,), (0.5,), (1.0, 2.0)]), st.integers(0, 2), st.integers(0, 2**31))
def test_iso_round_trip(k, alpha, deg, seed):
    d = len(alpha)
    l = (deg,) * d
    f = PiecewisePoly.random(kappa_of(k, alpha), l, np.random.default_rng(seed))
    g = ps.iso_Ik_inverse(ps.iso_Ik(f, alpha, k), d, l, alpha, k)
    np.testing.assert_allclose(g.coeffs, f.coeffs, atol=1e-10)


def test_json_round_trip(rng, tmp_path):
    f = PiecewisePoly.random((1, 2), (1, 0), rng)
    g = PiecewisePoly.from_json(f.to_json())
    assert g.kappa == f.kappa and g.l == f.l
    np.testing.assert_array_equal(g.coeffs, f.coeffs)
    with pytest.raises(ValueError):
        PiecewisePoly.from_json('{"d": 2, "l": [0], "kappa": [0, 0], "coefficients": [1]}')


@pytest.mark.parametrize("p", [1.0, 2.0, math.inf])
def test_norm_equivalence_bracket(p):
    spread = norm_equivalence_spread(1, (1,), (1.0,), p, 5, np.random.default_rng(3), range(6))
    assert spread <= 10


def test_bracket_rule_is_looser_than_default():
    assert BRACKET_RULE.tol > 1e-8


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 30), st.sampled_from([1.0, 1.5, 2.0, 4.0, math.inf]),
       st.sampled_from([1.0, 1.5, 2.0, 4.0, math.inf]), st.integers(0, 2**31))
def test_finite_dimensional_norm_comparison(n, p, q, seed):
    x = np.random.default_rng(seed).standard_normal(n)
    ip = 0 if math.isinf(p) else 1 / p
    iq = 0 if math.isinf(q) else 1 / q
    assert np.linalg.norm(x, q) <= n ** max(iq - ip, 0) * np.linalg.norm(x, p) * (1 + 1e-12)
