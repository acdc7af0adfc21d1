import math

import numpy as np
import pytest
from scipy import integrate

from bernwidth.catalog import catalog_function
from bernwidth.indexgrid import Cell, kappa_of
from bernwidth.polyspace import GridFunction, PiecewisePoly, lp_norm
from bernwidth.projectors import (
    E_k,
    E_kappa,
    ProjectorConfig,
    approx_error,
    calE_k,
    frakE,
    gram_against,
    local_project,
)
from bernwidth.verify import (
    PROJECTOR_CASES,
    SMOOTH_RULE,
    VerifyOptions,
    algebra_gaps,
    projector_algebra,
    random_smooth,
    sup_gap,
)

square = GridFunction(lambda x: x[:, 0] ** 2, 1, "x^2")


def test_local_project_mean_value():
    p = local_project(square, Cell((0,), (0,)), (0,))
    assert p(np.array([[0.3]]))[0] == pytest.approx(1 / 3, abs=1e-12)


def test_local_project_reproduces_polynomials():
    f = GridFunction(lambda x: 3 * x[:, 0] * x[:, 1] - x[:, 1] + 0.5, 2)
    cell = Cell((1, 2), (1, 3))
    p = local_project(f, cell, (1, 1))
    x = cell.lower() + np.random.default_rng(0).random((50, 2)) * (cell.upper() - cell.lower())
    np.testing.assert_allclose(p(x), f(x), atol=1e-12)


def test_local_project_linear_on_unit_interval():
    p = local_project(GridFunction(lambda x: x[:, 0], 1), Cell((0,), (0,)), (1,))
    x = np.linspace(0, 1, 7)[:, None]
    np.testing.assert_allclose(p(x), x[:, 0], atol=1e-12)


def test_local_project_residual_is_orthogonal():
    # the defining kernel property: f - Pf is orthogonal to every polynomial of degree <= l
    f = GridFunction(lambda x: np.exp(x[:, 0]), 1)
    p = local_project(f, Cell((0,), (0,)), (2,))
    for m in range(3):
        r = integrate.quad(lambda t: (math.exp(t) - p(np.array([[t]]))[0]) * t**m, 0, 1, epsabs=1e-14)[0]
        assert abs(r) < 1e-11


def test_E_kappa_sine_mean():
    f = GridFunction(lambda x: np.sin(np.pi * x[:, 0]), 1)
    g = E_kappa(f, (0,), (0,))
    assert g.evaluate(np.array([[0.1]]))[0] == pytest.approx(2 / math.pi, abs=1e-12)


def test_E_kappa_fixed_point_on_piecewise_constants(rng):
    f = PiecewisePoly.random((3,), (0,), rng)
    np.testing.assert_allclose(E_kappa(f, (3,), (0,)).coeffs, f.coeffs, atol=1e-14)


def test_E_kappa_zero():
    g = E_kappa(catalog_function("zero"), (2,), (1,))
    assert np.all(g.coeffs == 0)


def test_E_minus_one_is_zero():
    cfg = ProjectorConfig(1, (1,), (1.0,))
    assert lp_norm(E_k(square, cfg, -1), 2) == 0.0
    with pytest.raises(ValueError):
        E_k(square, cfg, -2)


def test_E_k_reproduces_its_space(rng):
    cfg = ProjectorConfig(2, (1, 0), (1.0, 2.0))
    f = PiecewisePoly.random(kappa_of(3, cfg.alpha), cfg.l, rng)
    assert sup_gap(E_k(f, cfg, 3), f, 2, rng) < 1e-12


def test_E_k_cell_means_of_square():
    # scipy oracle for the hand values 1/12 and 7/12
    g = E_k(square, ProjectorConfig(1, (0,), (1.0,)), 1)
    for x, lo, hi in [(0.25, 0, 0.5), (0.75, 0.5, 1)]:
        mean = integrate.quad(lambda t: t * t, lo, hi)[0] / (hi - lo)
        assert g.evaluate(np.array([[x]]))[0] == pytest.approx(mean, abs=1e-12)
    assert g.evaluate(np.array([[0.25], [0.75]])) == pytest.approx([1 / 12, 7 / 12], abs=1e-12)


def test_calE_zero_on_coarser_space(rng):
    cfg = ProjectorConfig(1, (1,), (1.0,))
    f = PiecewisePoly.random(kappa_of(2, cfg.alpha), cfg.l, rng)
    assert np.abs(calE_k(f, cfg, 3).coeffs).max() < 1e-12


def test_calE_at_zero_equals_E0(rng):
    cfg = ProjectorConfig(1, (1,), (1.0,))
    f = random_smooth(rng, 1)
    assert sup_gap(calE_k(f, cfg, 0), E_k(f, cfg, 0), 1, rng) < 1e-12
    with pytest.raises(ValueError):
        calE_k(f, cfg, -1)


def test_frakE_zero_on_coarse_space(rng):
    cfg = ProjectorConfig(2, (1, 1), (1.0, 1.0))
    f = PiecewisePoly.random(kappa_of(1, cfg.alpha), cfg.l, rng)
    assert np.abs(frakE(f, cfg, 1, 2).coeffs).max() < 1e-12
    with pytest.raises(ValueError):
        frakE(f, cfg, 1, 0)


@pytest.mark.parametrize("case", range(4))
def test_algebra_identities(case, rng):
    d, l, a = PROJECTOR_CASES[case]
    cfg = ProjectorConfig(d, l, a, rule=SMOOTH_RULE)
    for f in (PiecewisePoly.random(kappa_of(4, a), l, rng), random_smooth(rng, d)):
        gaps = algebra_gaps(f, cfg, 1, rng, 300)
        assert max(gaps.values()) < 1e-10, gaps


def test_fault_injection_breaks_semigroup():
    worst = projector_algebra(VerifyOptions(fault=1e-3), n_poly=4, n_smooth=0)
    assert worst["semigroup"] > 1e-6
    assert worst["decomposition"] < 1e-10  # a constant offset cancels in E_{k+j} - E_k


def test_kernel_characterisation(rng):
    # remove the level-k component; what is left is orthogonal to P_k and E_k kills it
    cfg = ProjectorConfig(2, (1, 0), (1.0, 1.0), rule=SMOOTH_RULE)
    f = random_smooth(rng, 2)
    ek = E_k(f, cfg, 2)
    g = GridFunction(lambda x: f(x) - ek.evaluate(x), 2)
    assert np.abs(gram_against(g, kappa_of(2, cfg.alpha), cfg.l, SMOOTH_RULE)).max() < 1e-10
    assert lp_norm(E_k(g, cfg, 2), 2) <= 1e-8


def test_stability_constant(rng):
    cfg = ProjectorConfig(1, (1,), (1.0,))
    worst = 0.0
    for _ in range(20):
        f = random_smooth(rng, 1)
        for q in (1.0, 2.0, math.inf):
            for k in range(5):
                worst = max(worst, lp_norm(E_k(f, cfg, k), q) / lp_norm(f, q))
    # L2 projection: exactly 1 in L2; for degree 1 the Lebesgue constant in L1/Linf is 2
    assert worst <= 2.0 + 1e-9


def test_approx_error_zero_for_polynomials():
    cfg = ProjectorConfig(1, (1,), (1.0,))
    lin = catalog_function("linear")
    assert all(approx_error(lin, cfg, k, q) < 1e-10 for k in range(4) for q in (1.0, 2.0, math.inf))


def _oracle_error(g, kappa):
    """Piecewise-constant L2 projection error computed cell by cell with scipy."""
    total = 0.0
    for i in range(2**kappa):
        a, b = i / 2**kappa, (i + 1) / 2**kappa
        brk = [0.5] if a < 0.5 < b else None
        mean = integrate.quad(g, a, b, points=brk, epsabs=1e-15, epsrel=1e-12)[0] / (b - a)
        total += integrate.quad(lambda t: (g(t) - mean) ** 2, a, b, points=brk, epsabs=1e-15, epsrel=1e-12)[0]
    return math.sqrt(total)


def test_approx_error_matches_scipy_oracle():
    f = catalog_function("abs-power:0.75")
    cfg = ProjectorConfig(1, (0,), (0.75,))
    for k in (2, 4, 6):
        want = _oracle_error(lambda t: abs(t - 0.5) ** 0.75, kappa_of(k, cfg.alpha)[0])
        assert approx_error(f, cfg, k, 2) == pytest.approx(want, rel=1e-6)


def test_approx_error_slope_of_kink():
    # degree 0 converges like h = 2^{-kappa}, the kink only like h^{1.25}; kappa = floor(4k/3)
    f = catalog_function("abs-power:0.75")
    cfg = ProjectorConfig(1, (0,), (0.75,))
    ks = np.arange(2, 8)
    err = np.array([approx_error(f, cfg, int(k), 2) for k in ks])
    slope = np.polyfit(ks, np.log2(err), 1)[0]
    assert slope == pytest.approx(-4 / 3, abs=0.1)
    assert slope <= -1 + 0.1  # never slower than the guaranteed 2^{-k}


def test_approx_error_sup_slope_of_kink():
    # in L_inf the Hoelder exponent 0.75 is the rate per level kappa
    f = catalog_function("abs-power:0.75")
    cfg = ProjectorConfig(1, (0,), (0.75,))
    ks = np.arange(2, 8)
    kap = [kappa_of(int(k), cfg.alpha)[0] for k in ks]
    err = np.array([approx_error(f, cfg, int(k), math.inf) for k in ks])
    assert np.polyfit(kap, np.log2(err), 1)[0] == pytest.approx(-0.75, abs=0.1)


def test_approx_error_monotone_for_cube():
    g = GridFunction(lambda x: x[:, 0] ** 3, 1)
    cfg = ProjectorConfig(1, (1,), (1.0,))
    err = [approx_error(g, cfg, k, 2) for k in range(7)]
    assert all(b <= a for a, b in zip(err, err[1:]))
