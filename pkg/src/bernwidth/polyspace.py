"""Discontinuous piecewise tensor polynomials on dyadic grids.

Each cell carries coefficients in the tensor Legendre basis orthonormal on
that cell, so L2 norms are coefficient norms and local projection is a set of
inner products. Coefficients are stored as one (n_cells, n_basis) array with
cells and degrees both in lexicographic order.
"""
from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from . import quadrature as quad
from .indexgrid import (
    Cell,
    MultiIndex,
    basis_size,
    cell_bounds,
    cell_index,
    cell_positions,
    degree_indices,
    kappa_of,
    multi_index,
    n_cells,
)


def legendre01(u: np.ndarray, deg: int) -> np.ndarray:
    """Legendre polynomials orthonormal on [0, 1], shape (len(u), deg + 1)."""
    v = np.polynomial.legendre.legvander(2.0 * np.asarray(u, dtype=float) - 1.0, deg)
    return v * np.sqrt(2.0 * np.arange(deg + 1) + 1.0)


def local_basis(u: np.ndarray, l: Sequence[int]) -> np.ndarray:
    """Tensor basis on the reference cube at local coordinates u (M, d) -> (M, n_basis)."""
    u = np.atleast_2d(u)
    per_axis = [legendre01(u[:, j], lj) for j, lj in enumerate(l)]
    out = np.ones((u.shape[0], 1))
    for v in per_axis:
        out = (out[:, :, None] * v[:, None, :]).reshape(u.shape[0], -1)
    return out


def cell_basis(x: np.ndarray, kappa: Sequence[int], cells: np.ndarray, l: Sequence[int]) -> np.ndarray:
    """Orthonormal basis of cell ``cells[i]`` (flat index at level kappa) evaluated at ``x[i]``."""
    h = np.array([2.0**-k for k in kappa])
    pos = cell_positions(kappa)[cells]
    u = (x - pos * h) / h
    return local_basis(u, l) / math.sqrt(float(np.prod(h)))


@dataclass(frozen=True)
class GridFunction:
    """A real function on the closed unit cube given by a vectorised evaluator.

    ``evaluator`` maps an (M, d) array of points to M values and must be
    deterministic.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    d: int = 1
    label: str = "f"

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.asarray(self.evaluator(x), dtype=float).reshape(x.shape[0])

    def __add__(self, other: "GridFunction") -> "GridFunction":
        return GridFunction(lambda x: self(x) + other(x), self.d, f"({self.label}+{other.label})")

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        return GridFunction(lambda x: self(x) - other(x), self.d, f"({self.label}-{other.label})")

    def __mul__(self, c: float) -> "GridFunction":
        c = float(c)
        return GridFunction(lambda x: c * self(x), self.d, f"{c:g}*{self.label}")

    __rmul__ = __mul__


@dataclass(frozen=True)
class CellPolynomial:
    """One cell's polynomial: coefficients in the cell's orthonormal tensor basis."""

    cell: Cell
    l: MultiIndex
    coeffs: np.ndarray

    def __post_init__(self):
        if len(self.coeffs) != basis_size(self.l):
            raise ValueError(f"expected {basis_size(self.l)} coefficients, got {len(self.coeffs)}")

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        flat = _flat(self.cell)
        cells = np.full(x.shape[0], flat)
        return cell_basis(x, self.cell.level, cells, self.l) @ self.coeffs


def _flat_index(pos: np.ndarray, level: Sequence[int]) -> np.ndarray:
    """Lexicographic flat index of integer cell positions (M, d) at ``level``."""
    idx = np.zeros(pos.shape[0], dtype=np.int64)
    for j, k in enumerate(level):
        idx = idx * (1 << k) + pos[:, j]
    return idx


def _flat(cell: Cell) -> int:
    idx = 0
    for k, v in zip(cell.level, cell.position):
        idx = idx * (1 << k) + v
    return idx


class PiecewisePoly:
    """An element of the piecewise polynomial space at dyadic level ``kappa``.

    Values are immutable: arithmetic returns new objects and the coefficient
    array is flagged read-only.
    """

    __slots__ = ("kappa", "l", "coeffs")

    def __init__(self, kappa: Sequence[int], l: Sequence[int], coeffs):
        kappa, l = multi_index(kappa), multi_index(l)
        if len(kappa) != len(l):
            raise ValueError("kappa and l differ in length")
        c = np.array(coeffs, dtype=float).reshape(n_cells(kappa), basis_size(l))
        c.flags.writeable = False
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "l", l)
        object.__setattr__(self, "coeffs", c)

    def __setattr__(self, name, value):
        raise AttributeError("PiecewisePoly is immutable")

    def __repr__(self):
        return f"PiecewisePoly(kappa={self.kappa}, l={self.l}, cells={self.coeffs.shape[0]})"

    @property
    def d(self) -> int:
        return len(self.kappa)

    @classmethod
    def zeros(cls, kappa, l) -> "PiecewisePoly":
        return cls(kappa, l, np.zeros((n_cells(kappa), basis_size(l))))

    @classmethod
    def random(cls, kappa, l, rng: np.random.Generator) -> "PiecewisePoly":
        return cls(kappa, l, rng.uniform(-1.0, 1.0, (n_cells(kappa), basis_size(l))))

    def evaluate(self, x, cells=None) -> np.ndarray:
        """Values at points x; ``cells`` overrides which cell's polynomial is used."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if cells is None:
            cells = cell_index(self.kappa, x)
        b = cell_basis(x, self.kappa, cells, self.l)
        return np.einsum("mb,mb->m", b, self.coeffs[cells])

    __call__ = evaluate

    def piece(self, i: int) -> CellPolynomial:
        pos = tuple(int(v) for v in cell_positions(self.kappa)[i])
        return CellPolynomial(Cell(self.kappa, pos), self.l, self.coeffs[i].copy())

    def as_grid_function(self, label: str = "pp") -> GridFunction:
        return GridFunction(self.evaluate, self.d, label)

    def refine(self, kappa: Sequence[int]) -> "PiecewisePoly":
        """Exact re-representation at a finer level (componentwise kappa >= self.kappa)."""
        kappa = multi_index(kappa)
        if any(a < b for a, b in zip(kappa, self.kappa)):
            raise ValueError(f"cannot refine {self.kappa} to coarser {kappa}")
        if kappa == self.kappa:
            return self
        return project_exact(self, kappa, self.l)

    def _aligned(self, other: "PiecewisePoly"):
        if self.l != other.l:
            raise ValueError("degree mismatch")
        kappa = tuple(max(a, b) for a, b in zip(self.kappa, other.kappa))
        return self.refine(kappa), other.refine(kappa)

    def __add__(self, other: "PiecewisePoly") -> "PiecewisePoly":
        a, b = self._aligned(other)
        return PiecewisePoly(a.kappa, a.l, a.coeffs + b.coeffs)

    def __sub__(self, other: "PiecewisePoly") -> "PiecewisePoly":
        a, b = self._aligned(other)
        return PiecewisePoly(a.kappa, a.l, a.coeffs - b.coeffs)

    def __neg__(self) -> "PiecewisePoly":
        return PiecewisePoly(self.kappa, self.l, -self.coeffs)

    def __mul__(self, c: float) -> "PiecewisePoly":
        return PiecewisePoly(self.kappa, self.l, float(c) * self.coeffs)

    __rmul__ = __mul__

    def l2_norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def to_json(self) -> str:
        return json.dumps(
            {
                "d": self.d,
                "l": list(self.l),
                "kappa": list(self.kappa),
                "coefficients": self.coeffs.ravel().tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "PiecewisePoly":
        rec = json.loads(text)
        if len(rec["l"]) != rec["d"] or len(rec["kappa"]) != rec["d"]:
            raise ValueError("record dimension does not match l/kappa")
        return cls(rec["kappa"], rec["l"], rec["coefficients"])


Function = Union[GridFunction, PiecewisePoly]


def project_exact(f: PiecewisePoly, kappa: Sequence[int], l: Sequence[int]) -> PiecewisePoly:
    """L2 projection of a piecewise polynomial onto level ``kappa`` / degree ``l``.

    Integrates on the common refinement of both grids with enough Gauss nodes
    to be exact, so the result carries only roundoff.
    """
    kappa, l = multi_index(kappa), multi_index(l)
    common = tuple(max(a, b) for a, b in zip(kappa, f.kappa))
    pos = cell_positions(common)
    m = (max(f.l) + max(l)) // 2 + 1
    ref, w = quad.tensor_nodes(np.zeros((1, len(common))), np.ones((1, len(common))), m)
    ref, w = ref[0], w[0]

    # local coordinates from integer offsets: global x would cost 2^kappa * eps
    def local(level):
        shift = np.array(common) - np.array(level)
        owner = pos >> shift
        u = ((pos - (owner << shift))[:, None, :] + ref[None, :, :]) / (2.0**shift)
        return _flat_index(owner, level), u.reshape(-1, len(common))

    src, u_src = local(f.kappa)
    target, u_tgt = local(kappa)
    nq = ref.shape[0]
    fv = np.einsum("mb,mb->m", local_basis(u_src, f.l), np.repeat(f.coeffs[src], nq, axis=0))
    b = local_basis(u_tgt, l).reshape(len(pos), nq, -1)
    scale = 2.0 ** (0.5 * (sum(f.kappa) + sum(kappa)) - sum(common))
    contrib = scale * np.einsum("q,pq,pqb->pb", w, fv.reshape(len(pos), nq), b)
    out = np.zeros((n_cells(kappa), basis_size(l)))
    np.add.at(out, target, contrib)
    return PiecewisePoly(kappa, l, out)


def _check_point(x, d):
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != d:
        raise ValueError(f"point has dimension {x.shape[0]}, expected {d}")
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise ValueError(f"point {x} lies outside the unit cube")
    return x


def eval(f: PiecewisePoly, x) -> float:  # noqa: A001 - name fixed by the public API
    """Value of the owning cell's polynomial at a single point of the closed cube."""
    x = _check_point(x, f.d)
    return float(f.evaluate(x[None, :])[0])


def _values(f: Function, x: np.ndarray) -> np.ndarray:
    return f.evaluate(x) if isinstance(f, PiecewisePoly) else f(x)


# kinks of |f|^p along zero sets refine only the boxes they cross, so a deep
# level cap is cheap; the evaluation budget still bounds the work
NORM_MAX_LEVEL = 24
NORM_RULE = quad.QuadratureRule(max_level=NORM_MAX_LEVEL)


def _sup_subdivision(d: int) -> int:
    return {1: 256, 2: 32}.get(d, 8)


@functools.lru_cache(maxsize=32)
def _bernstein_inverse(n: int) -> np.ndarray:
    """Maps values at i/n (i = 0..n) to Bernstein coefficients of degree n."""
    u = np.arange(n + 1) / max(n, 1)
    k = np.arange(n + 1)
    comb = np.array([math.comb(n, i) for i in k], dtype=float)
    vander = comb * u[:, None] ** k * (1.0 - u[:, None]) ** (n - k)
    return np.linalg.inv(vander)


def hidden_sign_change(f: PiecewisePoly, m: int, p: float = 1.0):
    """Error-bound hook for ``adaptive_boxes`` integrating |f|^p.

    The Bernstein coefficients of a cell polynomial on a panel bound it. If
    f has one sign on all m^d Gauss nodes of the panel but some coefficients
    have the other sign, a lobe may hide between the nodes; its share of the
    integral is at most vol * (largest opposite-sign coefficient)^p, and
    twice that bounds what the error estimate cannot see. Other panels get 0.
    Panels must lie inside the cells of f (``owner`` = cell index).
    """
    grids = [np.arange(lj + 1) / max(lj, 1) for lj in f.l]
    ref = np.stack([g.ravel() for g in np.meshgrid(*grids, indexing="ij")], axis=1)
    inv = [_bernstein_inverse(lj) for lj in f.l]
    shape = tuple(lj + 1 for lj in f.l)

    def force(lo, hi, owner):
        x = lo[:, None, :] + (hi - lo)[:, None, :] * ref[None, :, :]
        coef = f.evaluate(x.reshape(-1, f.d), np.repeat(owner, ref.shape[0])).reshape(-1, *shape)
        for axis, mat in enumerate(inv):
            coef = np.moveaxis(np.tensordot(coef, mat, axes=([axis + 1], [1])), -1, axis + 1)
        coef = coef.reshape(len(lo), -1)
        pts, _ = quad.tensor_nodes(lo, hi, m)
        vals = f.evaluate(pts.reshape(-1, f.d), np.repeat(owner, pts.shape[1])).reshape(len(lo), -1)
        pos = vals.min(axis=1) > 0
        neg = vals.max(axis=1) < 0
        hidden = np.where(pos, np.clip(-coef.min(axis=1), 0, None), 0.0)
        hidden = np.where(neg, np.clip(coef.max(axis=1), 0, None), hidden)
        return 2.0 * np.prod(hi - lo, axis=1) * hidden**p

    return force


def lp_norm(f: Function, p: float, rule: quad.QuadratureRule | None = None, box=None) -> float:
    """L_p norm over the unit cube (or over ``box = (lower, upper)``).

    Piecewise polynomials are integrated cell by cell so kinks never fall
    inside a panel; p = inf takes the max over Gauss nodes, panel corners and
    centres.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    d = f.d
    if box is not None:
        lo = np.asarray(box[0], dtype=float).reshape(1, d)
        hi = np.asarray(box[1], dtype=float).reshape(1, d)
    elif isinstance(f, PiecewisePoly):
        lo, hi = cell_bounds(f.kappa)
    else:
        lo, hi = np.zeros((1, d)), np.ones((1, d))
    if isinstance(f, PiecewisePoly):
        rule = rule or quad.rule_for_degree(f.l, max_level=NORM_MAX_LEVEL)
        if p == 2 and box is None:
            vals = quad.gauss_boxes(lambda x, o: _values(f, x) ** 2, lo, hi, max(f.l) + 2)
            return float(np.sqrt(vals.sum()))
    rule = rule or NORM_RULE
    if math.isinf(p):
        m = rule.m | 1
        s = _sup_subdivision(d) if not isinstance(f, PiecewisePoly) else 2
        pts, _ = quad.sample_points(lo, hi, m, s)
        return float(np.abs(_values(f, pts)).max())
    force = hidden_sign_change(f, rule.m, p) if isinstance(f, PiecewisePoly) and box is None else None
    vals = quad.adaptive_boxes(lambda x, o: np.abs(_values(f, x)) ** p, lo, hi, rule, force)
    return float(vals.sum() ** (1.0 / p))


def iso_nodes(kappa: Sequence[int], l: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    """Interpolation nodes 2^-kappa (nu + lambda) and their owning cells."""
    h = np.array([2.0**-k for k in kappa])
    pos = cell_positions(kappa)
    lam = np.array(degree_indices(l), dtype=float)
    x = (pos[:, None, :] + lam[None, :, :]) * h
    cells = np.repeat(np.arange(pos.shape[0]), lam.shape[0])
    return x.reshape(-1, len(kappa)), cells


def iso_Ik(f: PiecewisePoly, alpha, k: int) -> np.ndarray:
    """Coefficient vector I_k f: cell polynomials sampled at the grid nodes."""
    kappa = kappa_of(k, alpha)
    if f.kappa != kappa:
        raise ValueError(f"level mismatch: f has {f.kappa}, kappa(k, alpha) = {kappa}")
    x, cells = iso_nodes(kappa, f.l)
    return f.evaluate(x, cells)


def _local_vandermonde(l: Sequence[int]) -> np.ndarray:
    lam = np.array(degree_indices(l), dtype=float)
    return local_basis(lam, l)


def iso_Ik_inverse(v, d: int, l, alpha, k: int) -> PiecewisePoly:
    """Inverse of iso_Ik: per-cell tensor interpolation at the same nodes."""
    l = multi_index(l)
    kappa = kappa_of(k, alpha)
    if len(l) != d or len(kappa) != d:
        raise ValueError("d, l and alpha disagree in length")
    nb = basis_size(l)
    v = np.asarray(v, dtype=float)
    if v.shape != (n_cells(kappa) * nb,):
        raise ValueError(f"expected vector of length {n_cells(kappa) * nb}, got {v.shape}")
    scale = math.sqrt(float(np.prod([2.0**-kj for kj in kappa])))
    vander = _local_vandermonde(l)
    coeffs = np.linalg.solve(vander, v.reshape(-1, nb).T).T * scale
    return PiecewisePoly(kappa, l, coeffs)
