import math
import os
import subprocess
import sys

import numpy as np
import pytest

from bernwidth import _core, _fallback


def phi_1d(u):
    """Reference bump on [0, 1]."""
    return math.exp(-1 / (u * (1 - u))) if 0 < u < 1 else 0.0


def test_bump_sum_against_pointwise_reference(kernels, rng):
    kappa = np.array([3, 5], dtype=np.int64)
    coef = rng.standard_normal(15)
    x = rng.random((300, 2))
    got = kernels.bump_sum(x, kappa, coef)
    for xi, g in zip(x, got):
        s = xi * kappa
        nu = np.floor(s).astype(int)
        want = coef[nu[0] * 5 + nu[1]] * phi_1d(s[0] - nu[0]) * phi_1d(s[1] - nu[1])
        assert g == pytest.approx(want, rel=1e-13, abs=1e-300)


def test_bump_sum_edges(kernels):
    kappa = np.array([4], dtype=np.int64)
    x = np.array([[0.0], [0.25], [1.0], [-0.1], [1.1]])
    np.testing.assert_array_equal(kernels.bump_sum(x, kappa, np.ones(4)), 0.0)


def test_subspace_ratios_against_numpy(kernels, rng):
    y = rng.standard_normal((50, 6))
    y[0] = 0.0
    rho = rng.uniform(0.1, 1, (2, 6))
    pexp = np.array([1.5, np.inf])
    got = kernels.subspace_ratios(y, rho, pexp, 3.0)
    assert got[0] == np.inf
    for row, g in zip(y[1:], got[1:]):
        mu = max(np.linalg.norm(row / rho[0], 1.5), np.abs(row / rho[1]).max())
        assert g == pytest.approx(np.linalg.norm(row, 3.0) / mu, rel=1e-13)


def test_pattern_search_improves_and_stays_on_sphere(kernels, rng):
    basis = np.linalg.qr(rng.standard_normal((6, 3)))[0].T.copy()
    rho = rng.uniform(0.1, 1, (1, 6))
    pexp = np.array([1.0])
    c0 = rng.standard_normal((4, 3))
    c0 /= np.linalg.norm(c0, axis=1, keepdims=True)
    start = kernels.subspace_ratios(c0 @ basis, rho, pexp, 2.0)
    c, vals = kernels.pattern_search(c0, basis, rho, pexp, 2.0, 100, 0.5, 1e-10)
    assert np.all(vals <= start + 1e-15)
    np.testing.assert_allclose(np.linalg.norm(c, axis=1), 1.0, atol=1e-12)
    np.testing.assert_allclose(kernels.subspace_ratios(c @ basis, rho, pexp, 2.0), vals, rtol=1e-12)


def test_backends_agree(rng):
    compiled = pytest.importorskip("bernwidth._kernels")
    x = rng.random((1000, 2))
    kappa = np.array([6, 4], dtype=np.int64)
    coef = rng.standard_normal(24)
    np.testing.assert_allclose(compiled.bump_sum(x, kappa, coef), _fallback.bump_sum(x, kappa, coef),
                               rtol=1e-13, atol=1e-300)
    y = rng.standard_normal((200, 5))
    rho = rng.uniform(0.2, 1, (2, 5))
    pexp = np.array([2.0, np.inf])
    np.testing.assert_allclose(compiled.subspace_ratios(y, rho, pexp, 1.0),
                               _fallback.subspace_ratios(y, rho, pexp, 1.0), rtol=1e-13)
    basis = np.linalg.qr(rng.standard_normal((5, 2)))[0].T.copy()
    c0 = rng.standard_normal((3, 2))
    a = compiled.pattern_search(c0, basis, rho, pexp, 1.0, 50, 0.5, 1e-9)
    b = _fallback.pattern_search(c0, basis, rho, pexp, 1.0, 50, 0.5, 1e-9)
    np.testing.assert_allclose(a[1], b[1], rtol=1e-12)


def test_backend_selection_env():
    env = dict(os.environ, BERNWIDTH_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from bernwidth import _core; print(_core.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
    assert _core.BACKEND in ("python", "cython")
