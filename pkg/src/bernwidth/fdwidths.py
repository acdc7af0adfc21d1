"""Bernstein widths of finite-dimensional diagonal ellipsoids.

Closed forms for B_p^N(rho) in l_q^N (p < q), the l_2 upper bound for boxes,
the shell lower-bound rate, and a sampling oracle that evaluates

    sup_L inf_{x in L} ||x||_q / mu_C(x)

over random and coordinate subspaces. The inner infimum is estimated by
random directions plus compass search, which can only overshoot it; the
oracle therefore reports the best value found over the sampled subspaces.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from . import _core


@dataclass(frozen=True)
class Ellipsoid:
    """B_p^N(rho) = {x : sum |x_j / rho_j|^p <= 1}, or the box when p = inf.

    Semi-axes are sorted descending on construction; ``order`` records the
    permutation so that ``semi_axes = original[order]``.
    """

    semi_axes: np.ndarray
    p: float = 2.0
    order: np.ndarray = field(default=None, compare=False)

    def __post_init__(self):
        rho = np.asarray(self.semi_axes, dtype=float).reshape(-1)
        if rho.size == 0 or np.any(~(rho > 0)):
            raise ValueError("semi-axes must be positive")
        if not self.p >= 1:
            raise ValueError("p must be >= 1")
        order = np.argsort(-rho, kind="stable")
        rho = rho[order]
        rho.flags.writeable = False
        object.__setattr__(self, "semi_axes", rho)
        object.__setattr__(self, "order", order)

    @property
    def dim(self) -> int:
        return self.semi_axes.size

    def scaled(self, a: float) -> "Ellipsoid":
        return Ellipsoid(self.semi_axes * a, self.p)


@dataclass(frozen=True)
class Intersection:
    members: tuple[Ellipsoid, ...]

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise ValueError("empty intersection")
        if len({m.dim for m in members}) != 1:
            raise ValueError("members differ in dimension")
        object.__setattr__(self, "members", members)

    @property
    def dim(self) -> int:
        return self.members[0].dim

    def scaled(self, a: float) -> "Intersection":
        return Intersection(tuple(m.scaled(a) for m in self.members))


ConvexBody = Union[Ellipsoid, Intersection]


def _stack(body: ConvexBody) -> tuple[np.ndarray, np.ndarray]:
    """Semi-axes in original coordinate order (J, N) and exponents (J,)."""
    members = body.members if isinstance(body, Intersection) else (body,)
    rho = np.empty((len(members), body.dim))
    for i, m in enumerate(members):
        rho[i, m.order] = m.semi_axes
    return rho, np.array([m.p for m in members], dtype=float)


def minkowski(body: ConvexBody, x) -> float:
    """Gauge mu_C(x); for an intersection, the max of the members' gauges."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != body.dim:
        raise ValueError(f"dimension mismatch: body has {body.dim}, x has {x.size}")
    if isinstance(body, Intersection):
        return max(minkowski(m, x) for m in body.members)
    y = np.abs(x[body.order]) / body.semi_axes
    if math.isinf(body.p):
        return float(y.max())
    return float(np.sum(y**body.p) ** (1.0 / body.p))


def _sorted_axes(rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=float).reshape(-1)
    if rho.size == 0 or np.any(~(rho > 0)):
        raise ValueError("semi-axes must be positive")
    return np.sort(rho)[::-1]


def width_ellipsoid_exact(rho, p: float, q: float, n: int) -> float:
    """b_n(B_p^N(rho), l_q^N) for 1 <= p < q <= inf."""
    return width_ellipsoid_grouped(_sorted_axes(rho), np.ones(len(rho), dtype=np.int64), p, q, n)


def width_ellipsoid_grouped(values, counts, p: float, q: float, n: int) -> float:
    """Same as ``width_ellipsoid_exact`` for axes given as (value, multiplicity) groups.

    ``values`` must be sorted descending. Only the n largest axes enter.
    """
    if not p < q:
        raise ValueError(f"closed form requires p < q, got p={p}, q={q}")
    values = np.asarray(values, dtype=float)
    counts = np.asarray(counts, dtype=np.int64)
    if n < 1 or n > counts.sum():
        raise ValueError(f"need 1 <= n <= N = {counts.sum()}")
    take = np.minimum(counts, np.maximum(n - np.concatenate([[0], np.cumsum(counts)[:-1]]), 0))
    use = take > 0
    v, c = values[use], take[use].astype(float)
    if math.isinf(q):
        return float(np.sum(c * v**-p) ** (-1.0 / p))
    e = p * q / (p - q)
    # factor out the largest axis to keep the negative powers in range
    v0 = v[0]
    return float(v0 * np.sum(c * (v / v0) ** e) ** (1.0 / e))


def width_box_l2_upper(rho, n: int) -> float:
    """Upper bound (2 * sum_{j > n/2} rho_j^2 / n)^{1/2} for the box B_inf^N(rho) in l_2."""
    return width_box_l2_upper_grouped(_sorted_axes(rho), np.ones(len(rho), dtype=np.int64), n)


def width_box_l2_upper_grouped(values, counts, n: int) -> float:
    values = np.asarray(values, dtype=float)
    counts = np.asarray(counts, dtype=np.int64)
    if n < 1 or n > counts.sum():
        raise ValueError(f"need 1 <= n <= N = {counts.sum()}")
    skip = n // 2  # 1-based indices j <= n/2 are dropped
    start = np.concatenate([[0], np.cumsum(counts)[:-1]])
    keep = np.clip(counts - np.maximum(skip - start, 0), 0, None).astype(float)
    return float(math.sqrt(2.0 * float(np.sum(keep * values**2)) / n))


def width_shell_lower_rate(p: float, q: float, n: int) -> float:
    """Growth rate of b_n(B(l_p^{2n}), l_q^{2n}) with the unknown constant set to 1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    ip = 0.0 if math.isinf(p) else 1.0 / p
    iq = 0.0 if math.isinf(q) else 1.0 / q
    if q <= 2 <= p:
        return float(n ** (iq - 0.5))
    if 2 <= q <= p:
        return 1.0
    return float(n ** (iq - ip))


@dataclass(frozen=True)
class SearchConfig:
    directions: int = 4096
    sweeps: int = 200
    step0: float = 0.5
    min_step: float = 1e-10
    refine_top: int = 8


DEFAULT_SEARCH = SearchConfig()


def _orthonormal_rows(basis: np.ndarray) -> np.ndarray:
    basis = np.atleast_2d(np.asarray(basis, dtype=float))
    q, r = np.linalg.qr(basis.T)
    diag = np.abs(np.diag(r))
    if diag.size < basis.shape[0] or diag.min() <= 1e-12 * max(diag.max(), 1e-300):
        raise np.linalg.LinAlgError("basis rows are linearly dependent")
    return q.T


def width_on_subspace(body: ConvexBody, basis, q: float, seed: int = 0,
                      search: SearchConfig = DEFAULT_SEARCH) -> float:
    """Estimate inf over span(basis) of ||x||_q / mu_C(x).

    Random unit directions in coefficient space are screened, then the best
    few are polished by compass search on the sphere. The result is never
    below the true infimum (up to roundoff).
    """
    b = _orthonormal_rows(basis)
    if b.shape[1] != body.dim:
        raise ValueError("basis dimension does not match the body")
    rho, pexp = _stack(body)
    n = b.shape[0]
    rng = np.random.default_rng(seed)
    starts = np.concatenate([np.eye(n), rng.standard_normal((search.directions, n))])
    starts /= np.linalg.norm(starts, axis=1, keepdims=True)
    vals = _core.subspace_ratios(starts @ b, rho, pexp, q)
    top = np.argsort(vals)[: search.refine_top]
    _, refined = _core.pattern_search(starts[top], b, rho, pexp, q, search.sweeps, search.step0, search.min_step)
    return float(min(vals.min(), refined.min()))


def leading_subspace(body: ConvexBody, n: int) -> np.ndarray:
    """Coordinates of the n largest semi-axes of the first member."""
    first = body.members[0] if isinstance(body, Intersection) else body
    basis = np.zeros((n, body.dim))
    basis[np.arange(n), first.order[:n]] = 1.0
    return basis


def width_oracle(body: ConvexBody, q: float, n: int, trials: int = 100, seed: int = 0,
                 search: SearchConfig = DEFAULT_SEARCH) -> float:
    """Best subspace value over the leading-coordinate subspace and ``trials``
    random Gaussian n-frames; each trial draws from its own child seed."""
    if not 1 <= n <= body.dim:
        raise ValueError(f"need 1 <= n <= {body.dim}")
    children = np.random.SeedSequence(seed).spawn(trials + 1)
    best = width_on_subspace(body, leading_subspace(body, n), q, seed=children[0], search=search)
    for child in children[1:]:
        rng = np.random.default_rng(child)
        frame = rng.standard_normal((n, body.dim))
        best = max(best, width_on_subspace(body, frame, q, seed=rng.integers(2**63), search=search))
    return best
