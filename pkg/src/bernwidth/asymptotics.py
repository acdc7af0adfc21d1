"""Rate computations for Bernstein widths of primed Besov balls in L_q(I^d).

All unspecified constants are 1, so every value here is meaningful only
through its growth in n (log-log slopes and bounded ratios).

Upper pipeline: choose k with 2 R_k <= n < 2 R_{k+1}, build the diagonal
body of scaled increment coefficients over levels k+1..k+j_n, and bound its
R_k-width either by the l_2 box estimate (p > max(2, q)) or exactly by the
ellipsoid formula (p < q). Lower pipeline: n-power times the l_p-shell rate,
plus a constructive certificate computed from disjoint bumps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _core
from . import quadrature as quad
from .fdwidths import (
    width_box_l2_upper_grouped,
    width_ellipsoid_grouped,
    width_shell_lower_rate,
)
from .indexgrid import big_kappa_of, dim_space, embedding_margin, harmonic_sum, smoothness_order
from .moduli import b_prime_norm
from .polyspace import GridFunction, lp_norm


class InapplicableRegime(ValueError):
    """No case of the rate theorem covers the given (alpha, p, q)."""


def _inv(x: float) -> float:
    return 0.0 if math.isinf(x) else 1.0 / x


@dataclass(frozen=True)
class Regime:
    label: str
    exponent: float
    conditions: tuple[tuple[str, bool], ...] = field(default=())
    violated: tuple[str, ...] = field(default=())

    @property
    def applicable(self) -> bool:
        return self.label != "inapplicable"

    def failed(self) -> list[str]:
        """Side conditions that rule the parameters out (all failed ones if none is singled out)."""
        return list(self.violated) or [name for name, ok in self.conditions if not ok]


def classify(alpha: Sequence[float], p: float, q: float) -> Regime:
    """Regime label and width exponent (b_n ~ n^-exponent) for (alpha, p, q)."""
    if not 1 <= p < math.inf:
        raise ValueError("p must lie in [1, inf)")
    if not q >= 1:
        raise ValueError("q must lie in [1, inf]")
    s = harmonic_sum(alpha)
    ip, iq = _inv(p), _inv(q)
    conds = {
        "embedding 1-(1/a,e)(1/p-1/q)_+ > 0": embedding_margin(alpha, p, q) > 0,
        "q <= p <= 2": q <= p <= 2,
        "q = p": q == p,
        "p < q": p < q,
        "1-(1/a,e)/p+(1/a,e)/q > 0": 1 - s * ip + s * iq > 0,
        "q <= 2 < p": q <= 2 < p,
        "1-(1/a,e)/p > 0": 1 - s * ip > 0,
        "2 <= q < p": 2 <= q < p,
        "1-(1/a,e)/p+(1/a,e)/q-(1/a,e)/2 > 0": 1 - s * ip + s * iq - s / 2 > 0,
    }
    table = tuple(conds.items())
    c = conds
    if c["q <= p <= 2"] or c["q = p"] or (c["p < q"] and c["1-(1/a,e)/p+(1/a,e)/q > 0"]):
        return Regime("R1", 1.0 / s, table)
    # at q = 2 both remaining cases apply with equal exponents; report R3
    if c["2 <= q < p"] and c["1-(1/a,e)/p+(1/a,e)/q-(1/a,e)/2 > 0"]:
        return Regime("R3", 1.0 / s - ip + iq, table)
    if c["q <= 2 < p"] and c["1-(1/a,e)/p > 0"]:
        return Regime("R2", 1.0 / s - ip + 0.5, table)
    ranges = [("p < q", "1-(1/a,e)/p+(1/a,e)/q > 0"),
              ("2 <= q < p", "1-(1/a,e)/p+(1/a,e)/q-(1/a,e)/2 > 0"),
              ("q <= 2 < p", "1-(1/a,e)/p > 0")]
    violated = [side for rng, side in ranges if c[rng] and not c[side]]
    if not c["embedding 1-(1/a,e)(1/p-1/q)_+ > 0"]:
        violated.insert(0, "embedding 1-(1/a,e)(1/p-1/q)_+ > 0")
    return Regime("inapplicable", math.nan, table, tuple(violated))


def pipeline_degree(alpha) -> tuple[int, ...]:
    """Degree l(alpha) - e used by the projectors of the upper pipeline."""
    return tuple(m - 1 for m in smoothness_order(alpha))


def choose_k(n: int, d: int, l: Sequence[int], alpha) -> tuple[int, int]:
    """The unique k with 2 R_k <= n < 2 R_{k+1}, together with R_k."""
    r0 = dim_space(d, l, alpha, 0)
    if n < 2 * r0:
        raise ValueError(f"n = {n} is below n0 = {2 * r0}")
    k = 0
    while 2 * dim_space(d, l, alpha, k + 1) <= n:
        k += 1
    return k, dim_space(d, l, alpha, k)


@dataclass(frozen=True)
class UpperBoundTrace:
    k: int
    r_k: int
    path: str
    rate: float
    slack: float
    levels: int
    value: float


def _body_groups(alpha, k: int, rate: float, slack: float, tail_tol: float = 1e-6, cap: int = 40):
    """Semi-axes rho_j = 2^{-(k+j) rate + slack j} with multiplicity R_{k+j}, j = 1..j_n."""
    d = len(alpha)
    l = pipeline_degree(alpha)
    r_k = dim_space(d, l, alpha, k)
    vals, counts = [], []
    running = 0.0
    for j in range(1, cap + 1):
        try:
            r = dim_space(d, l, alpha, k + j)
        except OverflowError:
            break
        rho = 2.0 ** (-(k + j) * rate + slack * j)
        vals.append(rho)
        counts.append(r)
        term = rho * math.sqrt(r)
        running += term
        if r >= 2 * r_k and term < tail_tol * running:
            break
    return np.array(vals), np.array(counts, dtype=np.int64), r_k


def upper_bound_trace(alpha, p: float, q: float, n: int) -> UpperBoundTrace:
    regime = classify(alpha, p, q)
    if not regime.applicable:
        raise InapplicableRegime(f"no regime applies; failed: {', '.join(regime.failed())}")
    d = len(alpha)
    k, r_k = choose_k(n, d, pipeline_degree(alpha), alpha)
    s = harmonic_sum(alpha)
    ip, iq = _inv(p), _inv(q)
    if q <= p <= 2 or q == p:
        return UpperBoundTrace(k, r_k, "direct", 1.0, 0.0, 0, 2.0**-k)
    if p > max(2.0, q):
        rate = 1 - s * ip + s * iq - s * max(iq - 0.5, 0.0)
        eps = (1 - s * ip - s * max(0.5 - iq, 0.0)) / 2
        vals, counts, _ = _body_groups(alpha, k, rate, eps)
        value = width_box_l2_upper_grouped(vals, counts, r_k)
        return UpperBoundTrace(k, r_k, "box-l2", rate, eps, len(vals), value)
    # p < q
    rate = 1 - s * ip + s * iq
    slack = rate / 2  # epsilon = delta = margin / 4
    vals, counts, _ = _body_groups(alpha, k, rate, slack)
    value = width_ellipsoid_grouped(vals, counts, p, q, r_k)
    return UpperBoundTrace(k, r_k, "ellipsoid", rate, slack, len(vals), value)


def upper_bound_value(alpha, p: float, q: float, n: int) -> float:
    """Upper-bound pipeline value for b_n (constants 1)."""
    return upper_bound_trace(alpha, p, q, n).value


def lower_bound_value(alpha, p: float, q: float, n: int) -> float:
    """n^{-1/(1/a,e) + 1/p - 1/q} times the l_p-shell width rate (constants 1)."""
    if embedding_margin(alpha, p, q) <= 0:
        raise InapplicableRegime("embedding condition 1-(1/a,e)(1/p-1/q)_+ > 0 fails")
    s = harmonic_sum(alpha)
    return float(n ** (-1.0 / s + _inv(p) - _inv(q)) * width_shell_lower_rate(p, q, n))


def bump_phi(x) -> np.ndarray:
    """Tensor exponential bump prod_j exp(-1/(x_j (1 - x_j))) on the open cube, 0 elsewhere."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    return _core.bump_sum(x, np.ones(x.shape[1], dtype=np.int64), np.ones(1))


@dataclass(frozen=True)
class BumpSystem:
    """Disjoint translates phi(kappa x - nu), nu in ``positions``, at refinement ``kappa``."""

    k: int
    kappa: tuple[int, ...]
    positions: np.ndarray

    @property
    def size(self) -> int:
        return self.positions.shape[0]

    @property
    def d(self) -> int:
        return len(self.kappa)

    def lattice_coefficients(self, beta) -> np.ndarray:
        """Scatter beta onto the full lattice (flat lexicographic index)."""
        beta = np.asarray(beta, dtype=float)
        if beta.shape != (self.size,):
            raise ValueError(f"expected {self.size} coefficients")
        coef = np.zeros(math.prod(self.kappa))
        coef[np.ravel_multi_index(self.positions.T, self.kappa)] = beta
        return coef

    def function(self, beta, label: str = "bumps") -> GridFunction:
        coef = self.lattice_coefficients(beta)
        kappa = np.array(self.kappa, dtype=np.int64)
        return GridFunction(lambda x: _core.bump_sum(x, kappa, coef), self.d, label)


def bump_system(n: int, alpha) -> BumpSystem:
    """Smallest k >= 2 with prod K(k-1, alpha) < 2n <= prod K(k, alpha); first 2n lattice sites."""
    if n < 1:
        raise ValueError("n must be >= 1")
    k = 2
    while not (math.prod(big_kappa_of(k - 1, alpha)) < 2 * n <= math.prod(big_kappa_of(k, alpha))):
        k += 1
    kappa = big_kappa_of(k, alpha)
    flat = np.arange(2 * n)
    positions = np.stack(np.unravel_index(flat, kappa), axis=1)
    return BumpSystem(k, kappa, positions)


BUMP_RULE = quad.QuadratureRule(m=6, tol=1e-10, max_level=14)
# the certificate needs rates, not digits; higher order keeps the bump lattice cheap
CERTIFICATE_RULE = quad.QuadratureRule(m=8, tol=1e-6, max_level=10)


def bump_lattice_norm(sys: BumpSystem, beta, r: float, rule: quad.QuadratureRule = BUMP_RULE) -> float:
    """||J beta||_{L_r(I^d)} by quadrature over the lattice cells of the system."""
    f = sys.function(beta)
    h = 1.0 / np.array(sys.kappa, dtype=float)
    grids = np.meshgrid(*(np.arange(kj) for kj in sys.kappa), indexing="ij")
    lo = np.stack([g.ravel() for g in grids], axis=1) * h
    hi = lo + h
    if math.isinf(r):
        pts, _ = quad.sample_points(lo, hi, rule.m | 1, 1)
        return float(np.abs(f(pts)).max())
    vals = quad.adaptive_boxes(lambda x, o: np.abs(f(x)) ** r, lo, hi, rule)
    return float(vals.sum() ** (1.0 / r))


def phi_norm(d: int, r: float, rule: quad.QuadratureRule = BUMP_RULE) -> float:
    """||phi||_{L_r(I^d)}."""
    if math.isinf(r):
        return math.exp(-4.0 * d)
    g = GridFunction(bump_phi, d, "phi")
    return lp_norm(g, r, rule)


def bump_norm_identity(sys: BumpSystem, beta, r: float) -> tuple[float, float]:
    """Both sides of ||J beta||_r = ||phi||_r kappa^{-e/r} ||beta||_r."""
    beta = np.asarray(beta, dtype=float)
    lhs = bump_lattice_norm(sys, beta, r)
    ir = _inv(r)
    bnorm = np.abs(beta).max() if math.isinf(r) else float(np.sum(np.abs(beta) ** r) ** ir)
    rhs = phi_norm(sys.d, r) * float(np.prod(np.array(sys.kappa, dtype=float) ** -ir)) * bnorm
    return lhs, rhs


def certificate_ratio(sys: BumpSystem, beta, alpha, p: float, theta: float, q: float,
                      t_grid=None, rule: quad.QuadratureRule = CERTIFICATE_RULE) -> float:
    """||J beta||_{L_q} / ||J beta||_{B'} for one coefficient vector."""
    f = sys.function(beta)
    num = bump_lattice_norm(sys, beta, q)
    den = b_prime_norm(f, alpha, p, theta, t_grid, rule, x_panels=max(sys.kappa)).total
    return num / den


def constructive_lower_certificate(alpha, p: float, theta: float, q: float, n: int,
                                   samples: int = 8, seed: int = 0, t_grid=None) -> float:
    """Lower bound on b_n of the primed Besov ball in L_q from one explicit subspace.

    The subspace is spanned by the first n bumps of the 2n-bump system; the
    infimum over it is estimated by the minimum ratio over e_1, the
    normalised all-ones vector and ``samples`` random unit vectors (the
    translates are congruent, so one coordinate vector stands for all).
    """
    if len(alpha) > 2 or n > 32:
        raise ValueError("certificate is limited to d <= 2 and n <= 32")
    if math.isinf(theta):
        raise ValueError("theta must be finite")
    sys = bump_system(n, alpha)
    rng = np.random.default_rng(seed)
    cands = [np.eye(n)[0], np.ones(n)]
    cands += list(rng.standard_normal((samples, n)))
    best = math.inf
    for c in cands:
        beta = np.zeros(sys.size)
        beta[:n] = c / np.linalg.norm(c)
        best = min(best, certificate_ratio(sys, beta, alpha, p, theta, q, t_grid))
    return best
