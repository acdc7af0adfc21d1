"""Invariant suites, one per module, run by ``bernwidth verify``.

Every check returns a ``CheckResult``; a suite passes when all of its checks
do. The projector suite honours ``fault`` so that a deliberately broken
projector can be shown to trip the semigroup check.
"""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import asymptotics as asy
from . import fdwidths as fw
from .catalog import catalog_function
from .indexgrid import (
    Cell,
    basis_size,
    cell_nesting,
    cells_at,
    dim_space,
    harmonic_sum,
    kappa_of,
)
from .moduli import (
    affine_transfer,
    b_prime_norm,
    embedding_constant,
    h_prime_norm,
    inverse_transfer,
    omega_avg,
)
from .polyspace import GridFunction, PiecewisePoly, iso_Ik, iso_Ik_inverse, lp_norm
from .projectors import E_k, ProjectorConfig, calE_k, frakE
from .quadrature import QuadratureRule

ALGEBRA_TOL = 1e-10
# bracket checks need a few digits, not eight
BRACKET_RULE = QuadratureRule(m=4, tol=1e-5, max_level=24)


@dataclass
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: str = ""
    seconds: float = 0.0

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class VerifyOptions:
    seed: int = 0
    fault: float = 0.0
    samples: int = 1000


@dataclass
class _Recorder:
    suite: str
    results: list = field(default_factory=list)

    def check(self, name: str, fn: Callable[[], tuple[bool, str]]):
        t0 = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failed invariant, not a crashed run
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        self.results.append(CheckResult(self.suite, name, bool(ok), detail, time.perf_counter() - t0))


def sup_gap(f, g, d: int, rng: np.random.Generator, samples: int = 1000) -> float:
    """max |f - g| over uniform random points of the cube."""
    x = rng.random((samples, d))
    fv = f.evaluate(x) if isinstance(f, PiecewisePoly) else f(x)
    gv = g.evaluate(x) if isinstance(g, PiecewisePoly) else g(x)
    return float(np.abs(fv - gv).max())


def random_smooth(rng: np.random.Generator, d: int, terms: int = 3) -> GridFunction:
    """Random trigonometric sum sum_i a_i sin(w_i . x + c_i)."""
    a = rng.uniform(-1, 1, terms)
    w = rng.uniform(-4, 4, (terms, d))
    c = rng.uniform(0, 2 * math.pi, terms)
    return GridFunction(lambda x: np.sin(x @ w.T + c) @ a, d, "random-smooth")


# ---------------------------------------------------------------- indexgrid


def suite_indexgrid(opts: VerifyOptions) -> list[CheckResult]:
    rec = _Recorder("indexgrid")
    rng = np.random.default_rng(opts.seed)
    alphas = [(1.0,), (0.75,), (1.0, 2.0), (0.5, 1.5, 2.5)]

    def monotone():
        for a in alphas:
            prev = kappa_of(0, a)
            for k in range(1, 13):
                cur = kappa_of(k, a)
                if any(c < p for c, p in zip(cur, prev)):
                    return False, f"alpha={a}, k={k}"
                prev = cur
        return True, "kappa(k) nondecreasing for k <= 12"

    def sandwich():
        worst = 0.0
        for a in alphas:
            d = len(a)
            l = (1,) * d
            s = harmonic_sum(a)
            r = [dim_space(d, l, a, k) / 2.0 ** (k * s) for k in range(13)]
            spread = max(r) / min(r)
            bound = 2.0**s * basis_size(l)
            worst = max(worst, spread / bound)
            if spread > bound:
                return False, f"alpha={a}: spread {spread:.3g} > {bound:.3g}"
        return True, f"max spread/bound {worst:.3f}"

    def tiling():
        for kappa in [(0,), (3,), (2, 1), (1, 0, 2)]:
            vol = sum((c.volume for c in cells_at(kappa)), Fraction(0))
            if vol != 1:
                return False, f"kappa={kappa}: volume {vol}"
        return True, "exact unit volume"

    def nesting():
        for _ in range(200):
            d = int(rng.integers(1, 4))
            fine = tuple(int(v) for v in rng.integers(0, 5, d))
            coarse = tuple(int(rng.integers(0, f + 1)) for f in fine)
            pos = tuple(int(rng.integers(0, 2**f)) for f in fine)
            parent = tuple(p >> (f - c) for p, f, c in zip(pos, fine, coarse))
            if not cell_nesting(Cell(fine, pos), Cell(coarse, parent)):
                return False, f"{fine}{pos} not inside {coarse}{parent}"
        return True, "200 random pairs"

    rec.check("kappa monotone in k", monotone)
    rec.check("dimension sandwich", sandwich)
    rec.check("cells tile the cube", tiling)
    rec.check("nested cells", nesting)
    return rec.results


# ---------------------------------------------------------------- polyspace


def norm_equivalence_spread(d: int, l, alpha, p: float, samples: int, rng, ks=range(6)) -> float:
    """max/min over k and samples of 2^{-k(1/a,e)/p} ||I_k f||_p / ||f||_p."""
    s = harmonic_sum(alpha)
    ratios = []
    for k in ks:
        kappa = kappa_of(k, alpha)
        for _ in range(samples):
            f = PiecewisePoly.random(kappa, l, rng)
            v = iso_Ik(f, alpha, k)
            if math.isinf(p):
                num = np.abs(v).max()
            else:
                num = 2.0 ** (-k * s / p) * float(np.sum(np.abs(v) ** p) ** (1.0 / p))
            ratios.append(num / lp_norm(f, p, BRACKET_RULE))
    return max(ratios) / min(ratios)


def suite_polyspace(opts: VerifyOptions) -> list[CheckResult]:
    rec = _Recorder("polyspace")
    rng = np.random.default_rng(opts.seed)

    def equivalence():
        worst = []
        for d, l, a in [(1, (1,), (1.0,)), (2, (1, 0), (1.0, 2.0))]:
            for p in (1.0, 2.0, math.inf):
                spread = norm_equivalence_spread(d, l, a, p, 4, rng, range(4))
                worst.append(spread)
                if spread > 10:
                    return False, f"d={d}, p={p}: spread {spread:.3g}"
        return True, f"max spread {max(worst):.3g}"

    def exact_l2():
        err = 0.0
        for kappa, l in [((3,), (2,)), ((2, 1), (1, 1))]:
            f = PiecewisePoly.random(kappa, l, rng)
            err = max(err, abs(lp_norm(f, 2) - f.l2_norm()))
        return err < 1e-12, f"max gap {err:.2e}"

    def round_trip():
        err = 0.0
        for d, l, a, k in [(1, (1,), (1.0,), 3), (2, (1, 2), (1.0, 2.0), 3)]:
            f = PiecewisePoly.random(kappa_of(k, a), l, rng)
            g = iso_Ik_inverse(iso_Ik(f, a, k), d, l, a, k)
            err = max(err, sup_gap(f, g, d, rng, opts.samples))
        return err < ALGEBRA_TOL, f"sup gap {err:.2e}"

    def inclusion():
        a = (1.0, 2.0)
        f = PiecewisePoly.random(kappa_of(3, a), (1, 1), rng)
        g = f.refine(kappa_of(4, a))
        err = sup_gap(f, g, 2, rng, opts.samples)
        return err < ALGEBRA_TOL, f"sup gap {err:.2e}"

    def vector_norms():
        for _ in range(100):
            n = int(rng.integers(1, 20))
            x = rng.standard_normal(n)
            p, q = rng.choice([1.0, 1.5, 2.0, 3.0, np.inf], 2)
            ip, iq = (0 if np.isinf(p) else 1 / p), (0 if np.isinf(q) else 1 / q)
            if np.linalg.norm(x, q) > n ** max(iq - ip, 0) * np.linalg.norm(x, p) * (1 + 1e-12):
                return False, f"n={n}, p={p}, q={q}"
        return True, "100 random vectors"

    rec.check("norm equivalence of I_k", equivalence)
    rec.check("exact L2 norm", exact_l2)
    rec.check("I_k round trip", round_trip)
    rec.check("inclusion of levels", inclusion)
    rec.check("finite-dimensional norm comparison", vector_norms)
    return rec.results


# ---------------------------------------------------------------- projectors


def algebra_gaps(f, cfg: ProjectorConfig, k: int, rng, samples: int) -> dict[str, float]:
    """Sampled sup-gaps of the projector identities for one input f."""
    d = cfg.d
    gaps = {}
    ek = E_k(f, cfg, k)
    gaps["reproduction"] = sup_gap(E_k(ek, cfg, k), ek, d, rng, samples)
    j = max(k - 1, 0)
    ej = E_k(f, cfg, j)
    gaps["semigroup"] = max(
        sup_gap(E_k(ek, cfg, j), ej, d, rng, samples),
        sup_gap(E_k(ej, cfg, k), ej, d, rng, samples),
    )
    ck = calE_k(f, cfg, k)
    gaps["increment idempotent"] = sup_gap(calE_k(ck, cfg, k), ck, d, rng, samples)
    zero = PiecewisePoly.zeros(ck.kappa, cfg.l)
    gaps["increment orthogonal"] = max(
        sup_gap(calE_k(ck, cfg, i), zero, d, rng, samples) for i in range(k + 2) if i != k
    )
    fr = frakE(f, cfg, k, 2)
    gaps["block idempotent"] = sup_gap(frakE(fr, cfg, k, 2), fr, d, rng, samples)
    gaps["block kernel"] = sup_gap(E_k(fr, cfg, k), zero, d, rng, samples)
    gaps["decomposition"] = sup_gap(E_k(f, cfg, k + 2), ek + fr, d, rng, samples)
    return gaps


PROJECTOR_CASES = [
    (1, (0,), (1.0,)),
    (1, (1,), (0.5,)),
    (2, (0, 0), (1.0, 2.0)),
    (2, (1, 1), (1.0, 1.0)),
]
SMOOTH_RULE = QuadratureRule(m=6, tol=1e-13, max_level=12)


def projector_algebra(opts: VerifyOptions, n_poly: int = 100, n_smooth: int = 20) -> dict[str, float]:
    """Worst sampled gap per identity over random piecewise polynomials and smooth functions."""
    rng = np.random.default_rng(opts.seed)
    worst: dict[str, float] = {}
    for i in range(n_poly + n_smooth):
        d, l, a = PROJECTOR_CASES[i % len(PROJECTOR_CASES)]
        k = int(rng.integers(0, 3 if d == 2 else 5))
        cfg = ProjectorConfig(d, l, a, rule=SMOOTH_RULE, fault=opts.fault)
        if i < n_poly:
            f = PiecewisePoly.random(kappa_of(k + 3, a), l, rng)
        else:
            f = random_smooth(rng, d)
        for name, g in algebra_gaps(f, cfg, k, rng, opts.samples // 4).items():
            worst[name] = max(worst.get(name, 0.0), g)
    return worst


def suite_projectors(opts: VerifyOptions) -> list[CheckResult]:
    rec = _Recorder("projectors")
    worst = projector_algebra(opts, n_poly=24, n_smooth=4)
    for name, gap in worst.items():
        rec.check(name, lambda gap=gap: (gap < ALGEBRA_TOL, f"sup gap {gap:.2e}"))

    def stability():
        rng = np.random.default_rng(opts.seed + 1)
        worst = 0.0
        for _ in range(6):
            f = random_smooth(rng, 1)
            cfg = ProjectorConfig(1, (1,), (1.0,), fault=opts.fault)
            for q in (1.0, 2.0, math.inf):
                for k in (0, 2, 4):
                    worst = max(worst, lp_norm(E_k(f, cfg, k), q) / lp_norm(f, q))
        return worst <= 3.0, f"max ||E_k f|| / ||f|| = {worst:.3f}"

    rec.check("stability", stability)
    return rec.results


# ---------------------------------------------------------------- moduli


def suite_moduli(opts: VerifyOptions) -> list[CheckResult]:
    rec = _Recorder("moduli")
    lin = catalog_function("linear", 1)

    def golden():
        w = omega_avg(lin, 0, 1, 0.5, 1)
        h = h_prime_norm(lin, (0.5,), 1).seminorms[0]
        ok = abs(w - 1 / 6) < 1e-6 and abs(h - 1 / (3 * math.sqrt(2))) < 1e-3
        return ok, f"omega={w:.10f}, seminorm={h:.6f}"

    def annihilation():
        worst = max(omega_avg(lin, 0, 2, t, 2) for t in (0.01, 0.1, 0.4))
        return worst < 1e-10, f"max {worst:.2e}"

    def subadditive():
        f = catalog_function("sin:1", 1)
        g = catalog_function("abs-power:0.75", 1)
        for t in (0.05, 0.3):
            lhs = omega_avg(f + g, 0, 1, t, 2)
            rhs = omega_avg(f, 0, 1, t, 2) + omega_avg(g, 0, 1, t, 2)
            if lhs > rhs + 1e-8:
                return False, f"t={t}: {lhs} > {rhs}"
        return True, "Minkowski holds"

    def embedding():
        for name in ("linear", "sin:1", "bump"):
            f = catalog_function(name, 1)
            h = h_prime_norm(f, (0.5,), 2).total
            b = b_prime_norm(f, (0.5,), 2, 2.0).total
            if h > embedding_constant((0.5,)) * b:
                return False, f"{name}: {h} > c * {b}"
        return True, "H' <= c1 B' on 3 catalog functions"

    def transfer():
        f = catalog_function("sin:1", 2)
        g, factor = affine_transfer(f, (0.5, 0.25), (0.25, 0.5), 2)
        back = inverse_transfer(g, (0.5, 0.25), (0.25, 0.5))
        x = np.random.default_rng(opts.seed).random((200, 2)) * [0.5, 0.25] + [0.25, 0.5]
        err = float(np.abs(back(x) - f(x)).max())
        return err < 1e-12 and abs(factor - 2.0 ** (3 / 2)) < 1e-12, f"round trip {err:.1e}"

    rec.check("golden values", golden)
    rec.check("polynomial annihilation", annihilation)
    rec.check("subadditivity", subadditive)
    rec.check("embedding constant", embedding)
    rec.check("affine transfer", transfer)
    return rec.results


# ---------------------------------------------------------------- fdwidths


def suite_fdwidths(opts: VerifyOptions) -> list[CheckResult]:
    rec = _Recorder("fdwidths")
    rng = np.random.default_rng(opts.seed)
    search = fw.SearchConfig(directions=512, sweeps=100)

    def closed_form():
        v = fw.width_ellipsoid_exact([1, 0.5, 0.25], 1, 2, 2)
        return abs(v - 5**-0.5) < 1e-12, f"{v!r}"

    def dominance():
        rho = np.array([1, 0.8, 0.5, 0.3, 0.2, 0.1])
        exact = fw.width_ellipsoid_exact(rho, 1, 2, 2)
        got = fw.width_oracle(fw.Ellipsoid(rho, 1), 2, 2, trials=50, seed=opts.seed, search=search)
        return exact - 1e-6 <= got <= exact + 1e-7, f"oracle {got:.9f} vs exact {exact:.9f}"

    def box_bound():
        for _ in range(5):
            rho = np.sort(rng.uniform(0.05, 1, 6))[::-1]
            got = fw.width_oracle(fw.Ellipsoid(rho, math.inf), 2, 3, trials=10, seed=opts.seed, search=search)
            bound = fw.width_box_l2_upper(rho, 3)
            if got > bound + 1e-9:
                return False, f"oracle {got} > bound {bound}"
        return True, "5 random boxes"

    def intersection():
        a = fw.Ellipsoid(rng.uniform(0.1, 1, 5), 2)
        b = fw.Ellipsoid(rng.uniform(0.1, 1, 5), math.inf)
        body = fw.Intersection((a, b))
        for _ in range(50):
            x = rng.standard_normal(5)
            if fw.minkowski(body, x) != max(fw.minkowski(a, x), fw.minkowski(b, x)):
                return False, "gauge of intersection differs from max"
        return True, "50 random points"

    def scaling():
        body = fw.Ellipsoid([1, 0.6, 0.3, 0.1], 2)
        basis = rng.standard_normal((2, 4))
        v1 = fw.width_on_subspace(body, basis, 3.0, seed=1, search=search)
        v2 = fw.width_on_subspace(body.scaled(2.0), basis, 3.0, seed=1, search=search)
        return abs(v2 - 2 * v1) < 1e-9, f"{v1:.6f} -> {v2:.6f}"

    rec.check("closed form", closed_form)
    rec.check("formula dominates oracle", dominance)
    rec.check("box l2 upper bound", box_bound)
    rec.check("intersection gauge", intersection)
    rec.check("homogeneity", scaling)
    return rec.results


# ---------------------------------------------------------------- asymptotics

REGIME_INSTANCES = [
    ("R1", (1.0,), 2.0, 2.0),
    ("R2", (2.0, 2.0), 4.0, 1.0),
    ("R3", (2.0, 2.0), 4.0, 2.0),
]


def loglog_slope(ns, values) -> float:
    return float(np.polyfit(np.log2(ns), np.log2(values), 1)[0])


def rate_fit(alpha, p, q, ns) -> dict[str, float]:
    """Fitted upper/lower slopes and the oscillation band of upper * n^exponent."""
    reg = asy.classify(alpha, p, q)
    ns = np.asarray(ns, dtype=float)
    up = np.array([asy.upper_bound_value(alpha, p, q, int(n)) for n in ns])
    lo = np.array([asy.lower_bound_value(alpha, p, q, int(n)) for n in ns])
    band = up * ns**reg.exponent
    return {
        "exponent": reg.exponent,
        "upper": loglog_slope(ns, up),
        "lower": loglog_slope(ns, lo),
        "band": float(band.max() / band.min()),
    }


def suite_asymptotics(opts: VerifyOptions) -> list[CheckResult]:
    rec = _Recorder("asymptotics")
    ns = [2**i for i in range(6, 15)]
    for label, alpha, p, q in REGIME_INSTANCES:
        def rates(label=label, alpha=alpha, p=p, q=q):
            got = asy.classify(alpha, p, q).label
            fit = rate_fit(alpha, p, q, ns)
            e = fit["exponent"]
            ok = (got == label and abs(fit["upper"] + e) <= 0.05
                  and abs(fit["lower"] + e) <= 0.05 and fit["band"] <= 20)
            return ok, (f"{got}: slopes {fit['upper']:.4f}/{fit['lower']:.4f} vs {-e:.4f}, "
                        f"band {fit['band']:.2f}")
        rec.check(f"rates {label}", rates)

    def bumps():
        rng = np.random.default_rng(opts.seed)
        worst = 0.0
        for alpha in ((1.0,), (1.0, 1.0)):
            sys = asy.bump_system(3, alpha)
            for r in (1.0, 2.0, math.inf):
                lhs, rhs = asy.bump_norm_identity(sys, rng.standard_normal(sys.size), r)
                worst = max(worst, abs(lhs - rhs) / rhs)
        return worst < 1e-6, f"max relative gap {worst:.2e}"

    def certificate():
        c4 = asy.constructive_lower_certificate((1.0,), 2, 2, 2, 4, samples=2, seed=opts.seed)
        c8 = asy.constructive_lower_certificate((1.0,), 2, 2, 2, 8, samples=2, seed=opts.seed)
        step = math.log2(c8 / c4)
        return c4 > 0 and c8 > 0 and abs(step + 1) <= 0.35, f"log2 step {step:.3f}"

    rec.check("bump norm identity", bumps)
    rec.check("certificate rate", certificate)
    return rec.results


SUITES: dict[str, Callable[[VerifyOptions], list[CheckResult]]] = {
    "indexgrid": suite_indexgrid,
    "polyspace": suite_polyspace,
    "projectors": suite_projectors,
    "moduli": suite_moduli,
    "fdwidths": suite_fdwidths,
    "asymptotics": suite_asymptotics,
}


def run_suite(name: str, opts: VerifyOptions = VerifyOptions()) -> list[CheckResult]:
    """Run one suite by name, or every suite for ``"all"``."""
    if name == "all":
        return [r for fn in SUITES.values() for r in fn(opts)]
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join([*SUITES, 'all'])}")
    return SUITES[name](opts)
