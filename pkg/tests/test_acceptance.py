"""Acceptance checks for the whole package.

Each test records one PASS/FAIL line (printed in the terminal summary) and
then asserts, so a failure is both visible in the summary and red in pytest.
"""

import math
import time

import numpy as np
import pytest

from bernwidth import asymptotics as asy
from bernwidth import fdwidths as fw
from bernwidth.catalog import BUILTIN, catalog_function
from bernwidth.moduli import b_prime_norm, embedding_constant, h_prime_norm, omega_avg
from bernwidth.verify import (
    REGIME_INSTANCES,
    VerifyOptions,
    norm_equivalence_spread,
    projector_algebra,
    rate_fit,
)

pytestmark = pytest.mark.acceptance


class Clock:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def test_projector_algebra(acceptance):
    with Clock() as c:
        worst = projector_algebra(VerifyOptions(), n_poly=100, n_smooth=20)
    gap = max(worst.values())
    ok = gap < 1e-10 and c.elapsed < 60
    acceptance("projector algebra", ok, f"worst identity gap {gap:.2e}, {c.elapsed:.1f}s")
    assert ok, worst


def test_norm_equivalence(acceptance):
    spreads = {}
    with Clock() as c:
        for d, l, a in [(1, (1,), (1.0,)), (2, (1, 0), (1.0, 2.0))]:
            for p in (1.0, 2.0, math.inf):
                base = norm_equivalence_spread(d, l, a, p, 10, np.random.default_rng(d))
                double = norm_equivalence_spread(d, l, a, p, 20, np.random.default_rng(100 + d))
                spreads[d, p] = (base, double)
    worst = max(max(v) for v in spreads.values())
    drift = max(abs(b / a - 1) for a, b in spreads.values())
    ok = worst <= 10 and drift <= 0.2 and c.elapsed < 120
    acceptance("norm equivalence", ok,
               f"max spread {worst:.3f}, doubling drift {drift:.1%}, {c.elapsed:.1f}s")
    assert ok, spreads


def test_modulus_golden_values(acceptance):
    lin = catalog_function("linear")
    om = omega_avg(lin, 0, 1, 0.5, 1)
    semi = h_prime_norm(lin, (0.5,), 1).seminorms[0]
    e1, e2 = abs(om - 1 / 6), abs(semi - 1 / (3 * math.sqrt(2)))
    ok = e1 <= 1e-6 and e2 <= 1e-3
    acceptance("modulus golden values", ok, f"omega error {e1:.1e}, seminorm error {e2:.1e}")
    assert ok


def test_ellipsoid_widths(acceptance):
    rng = np.random.default_rng(2024)
    with Clock() as c:
        rho = [1.0, 0.5, 0.25]
        exact = fw.width_ellipsoid_exact(rho, 1, 2, 2)
        err = abs(exact - 5**-0.5)
        got = fw.width_oracle(fw.Ellipsoid(rho, 1), 2, 2, trials=1000, seed=7)
        excess = 0.0
        for _ in range(10):
            box = rng.uniform(0.05, 1, 6)
            w = fw.width_oracle(fw.Ellipsoid(box, math.inf), 2, 3, trials=20, seed=3)
            excess = max(excess, w - fw.width_box_l2_upper(box, 3))
    in_bracket = exact - 1e-6 <= got <= exact
    ok = err <= 1e-12 and in_bracket and excess <= 0 and c.elapsed < 60
    acceptance("ellipsoid widths", ok,
               f"formula error {err:.1e}, oracle gap {exact - got:.1e}, "
               f"box excess {excess:.1e}, {c.elapsed:.1f}s")
    assert ok


def test_bump_identity(acceptance):
    rng = np.random.default_rng(5)
    worst = 0.0
    with Clock() as c:
        for d in (1, 2):
            sys = asy.bump_system(4, (1.0,) * d)
            for r in (1.0, 2.0, math.inf):
                for _ in range(50):
                    lhs, rhs = asy.bump_norm_identity(sys, rng.standard_normal(sys.size), r)
                    worst = max(worst, abs(lhs - rhs) / rhs)
    ok = worst < 1e-6
    acceptance("bump identity", ok, f"max relative error {worst:.1e}, {c.elapsed:.1f}s")
    assert ok


def test_rate_reproduction(acceptance):
    ns = [2**i for i in range(6, 15)]
    fits = {}
    with Clock() as c:
        for label, alpha, p, q in REGIME_INSTANCES:
            fits[label] = rate_fit(alpha, p, q, ns)
    expected = {"R1": 1.0, "R2": 1.25, "R3": 1.25}
    ok = c.elapsed < 120
    parts = []
    for label, fit in fits.items():
        e = expected[label]
        ok &= fit["exponent"] == pytest.approx(e, abs=1e-12)
        ok &= abs(fit["upper"] + e) <= 0.05 and abs(fit["lower"] + e) <= 0.05 and fit["band"] <= 20
        parts.append(f"{label} {fit['upper']:.3f}/{fit['lower']:.3f} band {fit['band']:.2f}")
    acceptance("rate reproduction", ok, "; ".join(parts) + f", {c.elapsed:.1f}s")
    assert ok, fits


def test_constructive_certificate(acceptance):
    with Clock() as c:
        cert = [asy.constructive_lower_certificate((1.0,), 2, 2, 2, n) for n in (4, 8, 16)]
    steps = np.diff(np.log2(cert))
    ok = min(cert) > 0 and bool(np.all(np.abs(steps + 1) <= 0.35)) and c.elapsed < 600
    acceptance("constructive certificate", ok,
               f"log2 steps {', '.join(f'{s:.3f}' for s in steps)}, {c.elapsed:.1f}s")
    assert ok, cert


EMBEDDING_SETS = [((0.5,), 1, 2.0), ((1.5,), 2, 1.0), ((0.5, 1.5), 2, 3.0)]


def test_embedding(acceptance):
    worst = 0.0
    with Clock() as c:
        for alpha, p, theta in EMBEDDING_SETS:
            const = embedding_constant(alpha)
            for name in BUILTIN:
                f = catalog_function(name, len(alpha))
                h = h_prime_norm(f, alpha, p).total
                b = b_prime_norm(f, alpha, p, theta).total
                worst = max(worst, h / (const * b) if b > 0 else (math.inf if h > 0 else 0.0))
    ok = worst <= 1
    acceptance("embedding", ok, f"max H'/(C B') {worst:.3f}, {c.elapsed:.1f}s")
    assert ok
