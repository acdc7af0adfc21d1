"""Averaged moduli of continuity and the primed Nikolskii/Besov norms on I^d.

The averaged modulus of order l in direction j is

    Omega'(f, t) = ( (2t)^-1 * int_{-t}^{t} ||Delta^l_{xi e_j} f||_p^p dxi )^(1/p)

where the inner norm runs over the shrunken cube D_{l xi e_j}. The integrand is
even in xi, so only xi in [0, t] is integrated, and the slab
{x_j < 1 - l xi} is mapped onto the unit cube so that the whole (xi, x)
integral becomes a single box integral handled by adaptive quadrature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import quadrature as quad
from .indexgrid import smoothness_order
from .polyspace import Function, GridFunction, PiecewisePoly, lp_norm

MODULUS_RULE = quad.QuadratureRule(m=4, tol=1e-6, max_level=16)
# kinks of |Delta f|^p run diagonally through the (xi, x) box; in 3+ dimensions
# bisection cannot chase them to tight tolerances within the point budget
MODULUS_RULE_MULTI = quad.QuadratureRule(m=4, tol=1e-2, max_level=16)
_NOISE = 64 * np.finfo(float).eps


def default_t_grid(t_min: float = 2.0**-12, t_max: float = 4.0, ratio: float = math.sqrt(2.0)) -> np.ndarray:
    """Geometric grid t_min, t_min*ratio, ... up to t_max (inclusive)."""
    n = int(round(math.log(t_max / t_min) / math.log(ratio)))
    return t_min * ratio ** np.arange(n + 1)


@dataclass(frozen=True)
class PrimedNorms:
    lp: float
    seminorms: tuple[float, ...]

    @property
    def total(self) -> float:
        return max(self.lp, max(self.seminorms))


def modulus_rule(d: int) -> quad.QuadratureRule:
    """Default quadrature rule for moduli of d-variate functions."""
    return MODULUS_RULE if d == 1 else MODULUS_RULE_MULTI


def _values(f: Function, x: np.ndarray) -> np.ndarray:
    return f.evaluate(x) if isinstance(f, PiecewisePoly) else f(x)


def _binomial_signs(l: int) -> np.ndarray:
    return np.array([math.comb(l, m) * (-1) ** (l - m) for m in range(l + 1)], dtype=float)


def difference(f: Function, j: int, l: int, xi: float, x) -> float | None:
    """l-th forward difference along axis j (0-based) with step xi at point x.

    Returns None when x is outside D_{l xi e_j}, i.e. when the segment from x
    to x + l xi e_j leaves the open unit cube.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    end = x[j] + l * xi
    if np.any(x <= 0.0) or np.any(x >= 1.0) or not 0.0 < end < 1.0:
        return None
    pts = np.repeat(x[None, :], l + 1, axis=0)
    pts[:, j] += xi * np.arange(l + 1)
    return float(_binomial_signs(l) @ _values(f, pts))


def _slab_integrand(f: Function, j: int, l: int, p: float):
    signs = _binomial_signs(l)

    def integrand(z, owner):
        xi = z[:, 0]
        x = z[:, 1:].copy()
        span = 1.0 - l * xi
        x[:, j] *= span
        acc = np.zeros(z.shape[0])
        size = np.zeros(z.shape[0])
        for m, c in enumerate(signs):
            pts = x.copy()
            pts[:, j] += m * xi
            v = c * _values(f, pts)
            acc += v
            size += np.abs(v)
        # pure cancellation noise (e.g. Delta^2 of an affine f) is an exact zero
        acc[np.abs(acc) <= _NOISE * size] = 0.0
        return np.abs(acc) ** p * np.clip(span, 0.0, None)

    return integrand


def _xi_integrals(f: Function, j: int, l: int, p: float, edges: np.ndarray, rule,
                  x_panels: int = 1) -> np.ndarray:
    """int_{edges[i]}^{edges[i+1]} g(xi) dxi for each panel, g = ||Delta||_p^p on the slab.

    ``x_panels`` pre-splits every x-axis of the slab, which helps integrands
    with many separated features (e.g. bump lattices).
    """
    d = f.d
    nb = len(edges) - 1
    lo = np.zeros((nb, d + 1))
    hi = np.ones((nb, d + 1))
    lo[:, 0], hi[:, 0] = edges[:-1], edges[1:]
    if x_panels > 1:
        grids = np.meshgrid(*([np.arange(x_panels)] * d), indexing="ij")
        cell = np.stack([g.ravel() for g in grids], axis=1) / x_panels
        nc = cell.shape[0]
        lo = np.repeat(lo, nc, axis=0)
        hi = np.repeat(hi, nc, axis=0)
        lo[:, 1:] = np.tile(cell, (nb, 1))
        hi[:, 1:] = lo[:, 1:] + 1.0 / x_panels
        vals = quad.adaptive_boxes(_slab_integrand(f, j, l, p), lo, hi, rule)[:, 0]
        return vals.reshape(nb, nc).sum(axis=1)
    return quad.adaptive_boxes(_slab_integrand(f, j, l, p), lo, hi, rule)[:, 0]


def omega_avg(f: Function, j: int, l: int, t: float, p: float, rule: quad.QuadratureRule | None = None) -> float:
    """Averaged modulus of order l along axis j (0-based) at scale t in L_p."""
    if t <= 0:
        raise ValueError("t must be positive")
    return float(omega_profile(f, j, l, [t], p, rule)[0])


def omega_profile(f: Function, j: int, l: int, ts: Sequence[float], p: float,
                  rule: quad.QuadratureRule | None = None, sub: int = 2, x_panels: int = 1) -> np.ndarray:
    """omega_avg at every t of an increasing grid, sharing one xi-partition."""
    ts = np.asarray(ts, dtype=float)
    if np.any(np.diff(ts) <= 0) or ts[0] <= 0:
        raise ValueError("t grid must be positive and increasing")
    rule = rule or modulus_rule(f.d)
    cap = 1.0 / l
    knots = np.unique(np.concatenate([[0.0], np.minimum(ts, cap)]))
    edges = np.unique(np.concatenate([np.linspace(a, b, sub + 1) for a, b in zip(knots[:-1], knots[1:])]))
    cum = np.concatenate([[0.0], np.cumsum(_xi_integrals(f, j, l, p, edges, rule, x_panels))])
    at = np.interp(np.minimum(ts, cap), edges, cum)
    return (np.maximum(at, 0.0) / ts) ** (1.0 / p)


def _profiles(f, alpha, p, t_grid, rule, x_panels=1):
    orders = smoothness_order(alpha)
    return [omega_profile(f, j, orders[j], t_grid, p, rule, x_panels=x_panels) for j in range(len(alpha))]


def h_prime_norm(f: Function, alpha, p: float, t_grid=None, rule: quad.QuadratureRule | None = None,
                 x_panels: int = 1) -> PrimedNorms:
    """Primed Nikolskii norm: seminorm_j = max_t t^{-alpha_j} Omega'_j(f, t) over the grid."""
    t_grid = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    if len(alpha) != f.d:
        raise ValueError("alpha length must equal the dimension of f")
    prof = _profiles(f, alpha, p, t_grid, rule, x_panels)
    semis = tuple(float(np.max(t_grid ** -a * w)) for a, w in zip(alpha, prof))
    return PrimedNorms(lp_norm(f, p), semis)


def besov_seminorm_from_profile(t_grid: np.ndarray, omega: np.ndarray, alpha_j: float, p: float, theta: float) -> float:
    """(int_0^inf t^{-1-theta*alpha} Omega'(t)^theta dt)^{1/theta} from grid samples.

    Trapezoid in log t on the grid; below the grid Omega' is extended as the
    power law fitted to the first two samples, above it the exact decay
    Omega'(t) ~ t^{-1/p} (valid once t exceeds the support 1/l of the
    xi-integrand) is integrated in closed form.
    """
    t = np.asarray(t_grid, dtype=float)
    w = np.asarray(omega, dtype=float)
    if not np.any(w > 0):
        return 0.0
    vals = t ** (-theta * alpha_j) * w**theta
    logt = np.log(t)
    body = float(np.sum(0.5 * (vals[1:] + vals[:-1]) * np.diff(logt)))
    tail = vals[-1] / (theta * (alpha_j + 1.0 / p))
    if w[0] > 0 and w[1] > 0:
        sigma = math.log(w[1] / w[0]) / (logt[1] - logt[0])
        head = vals[0] / (theta * (sigma - alpha_j)) if sigma > alpha_j else math.inf
    else:
        head = 0.0
    return float((body + tail + head) ** (1.0 / theta))


def b_prime_norm(f: Function, alpha, p: float, theta: float, t_grid=None,
                 rule: quad.QuadratureRule | None = None, x_panels: int = 1) -> PrimedNorms:
    """Primed Besov norm; theta = inf falls back to the Nikolskii norm."""
    if math.isinf(theta):
        return h_prime_norm(f, alpha, p, t_grid, rule, x_panels)
    if theta < 1:
        raise ValueError("theta must be >= 1")
    t_grid = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    if len(alpha) != f.d:
        raise ValueError("alpha length must equal the dimension of f")
    prof = _profiles(f, alpha, p, t_grid, rule, x_panels)
    semis = tuple(besov_seminorm_from_profile(t_grid, w, a, p, theta) for a, w in zip(alpha, prof))
    return PrimedNorms(lp_norm(f, p), semis)


def embedding_constant(alpha) -> float:
    """c_1(alpha) = max_j 2^{2 + alpha_j} bounding the H' norm by the B' norm."""
    return max(2.0 ** (2.0 + a) for a in alpha)


def affine_transfer(f: GridFunction, delta, x0, p: float, check: bool = True,
                    rtol: float = 1e-8) -> tuple[GridFunction, float]:
    """Pull f back along x -> x0 + delta * x.

    Returns the transferred function and the L_p factor delta^{-1/p} (product
    over axes) relating its norm on I^d to the norm of f on x0 + delta I^d.
    With ``check`` the identity is verified by quadrature.
    """
    delta = np.asarray(delta, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    if np.any(delta <= 0):
        raise ValueError("delta must be positive")
    g = GridFunction(lambda x: f(x0 + delta * x), f.d, f"h[{f.label}]")
    factor = float(np.prod(delta)) ** (-1.0 / p)
    if check:
        lhs = lp_norm(g, p)
        rhs = factor * lp_norm(f, p, box=(x0, x0 + delta))
        if abs(lhs - rhs) > rtol * max(abs(rhs), 1e-300):
            raise ArithmeticError(f"transfer identity violated: {lhs} vs {rhs}")
    return g, factor


def inverse_transfer(g: GridFunction, delta, x0) -> GridFunction:
    """h^{-1}: x -> g((x - x0) / delta)."""
    delta = np.asarray(delta, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    return GridFunction(lambda x: g((x - x0) / delta), g.d, f"hinv[{g.label}]")
