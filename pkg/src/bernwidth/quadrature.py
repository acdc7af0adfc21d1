"""Composite and adaptive Gauss-Legendre quadrature on axis-aligned boxes.

Every routine works on a batch of boxes at once and returns one integral per
box; integrands are vectorised callables ``func(points, owner)`` where
``owner[i]`` is the index of the box that point ``i`` was generated for.
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class QuadratureError(RuntimeError):
    """Adaptive refinement hit its cap before meeting the tolerance."""


class QuadratureWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss nodes per axis plus the adaptive refinement policy.

    ``m`` nodes per axis per panel, relative tolerance ``tol`` and at most
    ``max_level`` bisections of any starting box. ``max_points`` bounds the
    integrand evaluations per vectorised call (memory), ``max_evals`` the
    total work of one adaptive run. ``atol`` is an absolute floor so that
    vanishing integrands terminate.
    """

    m: int = 4
    tol: float = 1e-8
    max_level: int = 12
    max_points: int = 2_000_000
    max_evals: int = 60_000_000
    strict: bool = True
    atol: float = 1e-15

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("need at least 2 Gauss nodes per axis")


DEFAULT_RULE = QuadratureRule()


def rule_for_degree(l, **kw) -> QuadratureRule:
    """Default rule for degree-l polynomial algebra: m = max l_j + 3."""
    return QuadratureRule(m=max(l) + 3, **kw)


@lru_cache(maxsize=64)
def gauss01(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [0, 1] (weights sum to 1)."""
    x, w = np.polynomial.legendre.leggauss(m)
    return (x + 1.0) / 2.0, w / 2.0


@lru_cache(maxsize=64)
def _tensor_ref(m: int, d: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = gauss01(m)
    pts = np.array(list(itertools.product(x, repeat=d)))
    wts = np.prod(np.array(list(itertools.product(w, repeat=d))), axis=1)
    return pts, wts


def tensor_nodes(lower, upper, m):
    """Tensor Gauss nodes of every box: points (B, m^d, d), weights (B, m^d)."""
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    ref, w = _tensor_ref(m, lower.shape[1])
    h = upper - lower
    pts = lower[:, None, :] + h[:, None, :] * ref[None, :, :]
    return pts, np.prod(h, axis=1)[:, None] * w[None, :]


def _evaluate(func, pts, owner):
    b, q, d = pts.shape
    vals = np.asarray(func(pts.reshape(-1, d), np.repeat(owner, q)), dtype=float)
    return vals.reshape(b, q, -1)


def gauss_boxes(func, lower, upper, m, owner=None, chunk: int | None = None):
    """Plain tensor Gauss on each box: returns (B, K).

    With ``chunk`` the boxes are processed in batches of at most that many
    integrand evaluations.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if owner is None:
        owner = np.arange(lower.shape[0])
    step = lower.shape[0] if chunk is None else max(1, chunk // m ** lower.shape[1])
    parts = []
    for i in range(0, max(lower.shape[0], 1), step):
        pts, w = tensor_nodes(lower[i:i + step], upper[i:i + step], m)
        vals = _evaluate(func, pts, owner[i:i + step])
        parts.append(np.einsum("bq,bqk->bk", w, vals))
    return parts[0] if len(parts) == 1 else np.concatenate(parts)


def subdivide(lower, upper, s):
    """Split every box into s^d equal sub-boxes; returns (lo, hi, parent)."""
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    b, d = lower.shape
    offs = np.array(list(itertools.product(range(s), repeat=d)), dtype=float)
    h = (upper - lower) / s
    lo = lower[:, None, :] + offs[None, :, :] * h[:, None, :]
    hi = lo + h[:, None, :]
    parent = np.repeat(np.arange(b), len(offs))
    return lo.reshape(-1, d), hi.reshape(-1, d), parent


def composite_boxes(func, lower, upper, m, s=1):
    """Composite Gauss with s sub-panels per axis inside every box."""
    lo, hi, parent = subdivide(lower, upper, s)
    vals = gauss_boxes(func, lo, hi, m, owner=parent)
    out = np.zeros((np.asarray(lower).shape[0], vals.shape[1]))
    np.add.at(out, parent, vals)
    return out


def adaptive_boxes(func, lower, upper, rule: QuadratureRule = DEFAULT_RULE, force=None):
    """Adaptive dyadic bisection of every box until the per-box error estimate
    falls below ``rule.tol`` relative to the box integral (floored by the
    batch-average magnitude scaled to the box volume).

    ``force(lo, hi, owner) -> array`` bounds, per panel, error that the
    two-level estimate cannot see (e.g. a sign change between the nodes);
    panels where that bound exceeds their tolerance share are refined anyway,
    up to the level cap.

    Returns an array (B, K) of integrals.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    nbox, d = lower.shape
    vol_box = np.prod(upper - lower, axis=1)
    vol_total = vol_box.sum()

    lo, hi, owner = lower, upper, np.arange(nbox)
    parent_est = gauss_boxes(func, lo, hi, rule.m, owner, rule.max_points)
    evals = nbox * rule.m**d
    k = parent_est.shape[1]
    accepted = np.zeros((nbox, k))
    nchild = 2**d
    failed = False
    level = 0
    while True:
        clo, chi, cparent = subdivide(lo, hi, 2)
        child = gauss_boxes(func, clo, chi, rule.m, owner[cparent], rule.max_points)
        evals += clo.shape[0] * rule.m**d
        child_sum = child.reshape(-1, nchild, k).sum(axis=1)
        err = np.abs(child_sum - parent_est).max(axis=1)

        est_box = accepted.copy()
        np.add.at(est_box, owner, child_sum)
        scale = np.abs(est_box).max(axis=1)
        floor = scale.sum() / max(vol_total, 1e-300) * vol_box
        tol_box = rule.tol * np.maximum(scale, floor) + rule.atol * vol_box
        err_box = np.zeros(nbox)
        np.add.at(err_box, owner, err)
        done_box = err_box <= tol_box

        vol_panel = np.prod(hi - lo, axis=1)
        share = tol_box[owner] * vol_panel / vol_box[owner]
        refine = ~done_box[owner] & (err > share)
        forced = (force(lo, hi, owner) > share) & ~refine if force is not None else np.zeros_like(refine)
        next_points = int(refine.sum()) * nchild * nchild * rule.m**d
        next_points += int(forced.sum()) * nchild * nchild * rule.m**d
        if level + 1 >= rule.max_level or evals + next_points > rule.max_evals:
            # panels refined only on suspicion are as small as allowed; accept them
            if refine.any():
                failed = True
            refine[:] = False
        else:
            refine |= forced
        np.add.at(accepted, owner[~refine], child_sum[~refine])
        if not refine.any():
            break
        ridx = np.flatnonzero(refine)
        sel = (ridx[:, None] * nchild + np.arange(nchild)).ravel()
        lo, hi = clo[sel], chi[sel]
        owner = owner[ridx].repeat(nchild)
        parent_est = child[sel]
        level += 1
    if failed:
        msg = f"adaptive quadrature stopped at level {level + 1} before reaching tol={rule.tol:g}"
        if rule.strict:
            raise QuadratureError(msg)
        warnings.warn(msg, QuadratureWarning, stacklevel=2)
    return accepted


def sample_points(lower, upper, m, s=1):
    """Gauss nodes of an s-fold subdivision plus corners and centres of every box.

    Used for sup-norms; odd ``m`` already contains the panel centres.
    """
    lo, hi, parent = subdivide(lower, upper, s)
    pts, _ = tensor_nodes(lo, hi, m)
    d = lo.shape[1]
    corners = np.array(list(itertools.product((0.0, 1.0), repeat=d)))
    cpts = lo[:, None, :] + (hi - lo)[:, None, :] * corners[None, :, :]
    mid = (0.5 * (lo + hi))[:, None, :]
    allp = np.concatenate([pts, cpts, mid], axis=1)
    owner = np.repeat(parent, allp.shape[1])
    return allp.reshape(-1, d), owner
