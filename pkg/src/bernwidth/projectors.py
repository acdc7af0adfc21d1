"""Cell-wise L2 projectors onto piecewise polynomial spaces and their increments.

The local projector is the L2(cell)-orthogonal projection onto degree-l tensor
polynomials: it reproduces polynomials and its kernel is the orthogonal
complement, which pins it down uniquely. Piecewise-polynomial inputs are
projected exactly on the common refinement; general functions go through
adaptive quadrature cell by cell.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import quadrature as quad
from .indexgrid import Cell, MultiIndex, cell_bounds, kappa_of, multi_index
from .polyspace import (
    CellPolynomial,
    Function,
    GridFunction,
    PiecewisePoly,
    cell_basis,
    lp_norm,
    project_exact,
)


@dataclass(frozen=True)
class ProjectorConfig:
    """Parameters of E_k: dimension, polynomial degree, smoothness vector.

    ``fault`` adds a constant offset to every projected cell; it exists only so
    the verification suite can demonstrate that its checks notice a broken
    projector.
    """

    d: int
    l: MultiIndex
    alpha: tuple[float, ...]
    rule: quad.QuadratureRule = field(default=quad.DEFAULT_RULE)
    fault: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "l", multi_index(self.l))
        object.__setattr__(self, "alpha", tuple(float(a) for a in self.alpha))
        if len(self.l) != self.d or len(self.alpha) != self.d:
            raise ValueError("d, l and alpha disagree in length")


def _project_grid(f: GridFunction, kappa, l, rule) -> np.ndarray:
    lo, hi = cell_bounds(kappa)

    def integrand(x, owner):
        return f(x)[:, None] * cell_basis(x, kappa, owner, l)

    return quad.adaptive_boxes(integrand, lo, hi, rule)


def E_kappa(f: Function, kappa, l, rule: quad.QuadratureRule | None = None, fault: float = 0.0) -> PiecewisePoly:
    """Apply the local projector on every cell of level ``kappa``."""
    kappa, l = multi_index(kappa), multi_index(l)
    if isinstance(f, PiecewisePoly):
        out = project_exact(f, kappa, l)
    else:
        if f.d != len(kappa):
            raise ValueError("dimension mismatch between f and kappa")
        out = PiecewisePoly(kappa, l, _project_grid(f, kappa, l, rule or quad.DEFAULT_RULE))
    if fault:
        c = out.coeffs.copy()
        c[:, 0] += fault * math.sqrt(2.0 ** -sum(kappa))
        out = PiecewisePoly(kappa, l, c)
    return out


def local_project(f: Function, cell: Cell, l, rule: quad.QuadratureRule | None = None) -> CellPolynomial:
    """L2(cell) projection of f onto tensor polynomials of degree <= l."""
    l = multi_index(l)
    lo = cell.lower()[None, :]
    hi = cell.upper()[None, :]
    flat = 0
    for k, v in zip(cell.level, cell.position):
        flat = flat * (1 << k) + v

    def integrand(x, owner):
        vals = f.evaluate(x) if isinstance(f, PiecewisePoly) else f(x)
        return vals[:, None] * cell_basis(x, cell.level, np.full(x.shape[0], flat), l)

    coeffs = quad.adaptive_boxes(integrand, lo, hi, rule or quad.DEFAULT_RULE)[0]
    return CellPolynomial(cell, l, coeffs)


def E_k(f: Function, cfg: ProjectorConfig, k: int) -> PiecewisePoly:
    """E_k = E_{kappa(k, alpha)}; E_{-1} is the zero element at the root level."""
    if k < -1:
        raise ValueError("k must be >= -1")
    if k == -1:
        return PiecewisePoly.zeros((0,) * cfg.d, cfg.l)
    return E_kappa(f, kappa_of(k, cfg.alpha), cfg.l, cfg.rule, cfg.fault)


def calE_k(f: Function, cfg: ProjectorConfig, k: int) -> PiecewisePoly:
    """Dyadic increment E_k f - E_{k-1} f, represented at level kappa(k, alpha)."""
    if k < 0:
        raise ValueError("k must be >= 0")
    fine = E_k(f, cfg, k)
    return fine - E_k(f, cfg, k - 1).refine(fine.kappa)


def frakE(f: Function, cfg: ProjectorConfig, k: int, j: int) -> PiecewisePoly:
    """Block increment E_{k+j} f - E_k f, represented at level kappa(k+j, alpha)."""
    if k < 0 or j < 1:
        raise ValueError("need k >= 0 and j >= 1")
    fine = E_k(f, cfg, k + j)
    return fine - E_k(f, cfg, k).refine(fine.kappa)


def approx_error(f: Function, cfg: ProjectorConfig, k: int, q: float) -> float:
    """||f - E_k f||_{L_q(I^d)}, integrated on the cells of E_k f."""
    ek = E_k(f, cfg, k)
    if isinstance(f, PiecewisePoly):
        return lp_norm(f - ek, q, cfg.rule)
    lo, hi = cell_bounds(ek.kappa)

    def diff(x):
        return f(x) - ek.evaluate(x)

    if math.isinf(q):
        pts, _ = quad.sample_points(lo, hi, cfg.rule.m | 1, 8 if cfg.d == 1 else 4)
        return float(np.abs(diff(pts)).max())
    vals = quad.adaptive_boxes(lambda x, o: np.abs(diff(x)) ** q, lo, hi, cfg.rule)
    return float(vals.sum() ** (1.0 / q))


def gram_against(f: Function, kappa, l, rule: quad.QuadratureRule | None = None) -> np.ndarray:
    """Inner products of f with the orthonormal basis of the level-kappa space."""
    if isinstance(f, PiecewisePoly):
        return project_exact(f, kappa, l).coeffs
    return _project_grid(f, multi_index(kappa), multi_index(l), rule or quad.DEFAULT_RULE)


__all__ = [
    "ProjectorConfig",
    "local_project",
    "E_kappa",
    "E_k",
    "calE_k",
    "frakE",
    "approx_error",
    "gram_against",
]
