"""Multi-indices, anisotropic dyadic levels and cells of the unit cube.

A multi-index is a plain tuple of nonnegative ints. Cells are kept in exact
dyadic arithmetic (integer numerators over powers of two) so that tiling and
nesting checks carry no rounding; floats appear only when quadrature needs them.
"""
from __future__ import annotations

import itertools
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

MultiIndex = tuple[int, ...]


def multi_index(entries: Sequence[int]) -> MultiIndex:
    """Validate and freeze a sequence of nonnegative ints."""
    out = tuple(int(e) for e in entries)
    if not out:
        raise ValueError("multi-index must have length >= 1")
    if any(e < 0 for e in out):
        raise ValueError(f"multi-index entries must be >= 0, got {out}")
    return out


def _exact(a: float) -> Fraction:
    # repr gives the shortest decimal that round-trips, i.e. what the user typed
    return Fraction(repr(float(a)))


def _check_alpha(alpha: Sequence[float]) -> tuple[float, ...]:
    alpha = tuple(float(a) for a in alpha)
    if not alpha or any(not (a > 0 and math.isfinite(a)) for a in alpha):
        raise ValueError(f"alpha must be a nonempty vector of positive reals, got {alpha}")
    return alpha


def smoothness_order(alpha: Sequence[float]) -> MultiIndex:
    """l(alpha)_j = min{m in N : alpha_j < m}, i.e. floor(alpha_j) + 1."""
    return tuple(math.floor(_exact(a)) + 1 for a in _check_alpha(alpha))


def harmonic_sum(alpha: Sequence[float]) -> float:
    """(alpha^{-1}, e) = sum_j 1/alpha_j."""
    return float(sum(1.0 / a for a in _check_alpha(alpha)))


def _inv(x: float) -> float:
    return 0.0 if math.isinf(x) else 1.0 / x


def embedding_margin(alpha: Sequence[float], p: float, q: float) -> float:
    """1 - (alpha^{-1}, e) (1/p - 1/q)_+ ; positive iff the L_p -> L_q condition holds."""
    return 1.0 - harmonic_sum(alpha) * max(_inv(p) - _inv(q), 0.0)


@dataclass(frozen=True)
class AnisoParams:
    """Smoothness vector plus integrability exponents, with derived quantities."""

    alpha: tuple[float, ...]
    p: float = 2.0
    q: float = 2.0
    theta: float = math.inf
    d: int = field(init=False)
    l: MultiIndex = field(init=False)
    harmonic: float = field(init=False)
    embeds: bool = field(init=False)

    def __post_init__(self):
        alpha = _check_alpha(self.alpha)
        if not 1 <= self.p < math.inf:
            raise ValueError(f"p must lie in [1, inf), got {self.p}")
        if not self.q >= 1:
            raise ValueError(f"q must lie in [1, inf], got {self.q}")
        if not self.theta >= 1:
            raise ValueError(f"theta must lie in [1, inf], got {self.theta}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "d", len(alpha))
        object.__setattr__(self, "l", smoothness_order(alpha))
        object.__setattr__(self, "harmonic", harmonic_sum(alpha))
        object.__setattr__(self, "embeds", embedding_margin(alpha, self.p, self.q) > 0)


def kappa_of(k: int, alpha: Sequence[float]) -> MultiIndex:
    """Dyadic level vector kappa(k, alpha)_j = floor(k / alpha_j)."""
    if k < 0:
        raise ValueError("k must be >= 0")
    return tuple(math.floor(k / _exact(a)) for a in _check_alpha(alpha))


def _floor_root(k: int, a: float) -> int:
    m = int(round(k ** (1.0 / a)))
    while m > 0 and m**a > k:
        m -= 1
    while (m + 1) ** a <= k:
        m += 1
    return m


def big_kappa_of(k: int, alpha: Sequence[float]) -> MultiIndex:
    """Lattice refinement K(k, alpha)_j = floor(k^{1/alpha_j}) used by bump systems."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return tuple(_floor_root(k, a) for a in _check_alpha(alpha))


def degree_indices(l: Sequence[int]) -> list[MultiIndex]:
    """All lambda with 0 <= lambda_j <= l_j, lexicographic (first axis slowest)."""
    return [tuple(t) for t in itertools.product(*(range(lj + 1) for lj in l))]


def basis_size(l: Sequence[int]) -> int:
    return math.prod(lj + 1 for lj in l)


def dim_space(d: int, l: Sequence[int], alpha: Sequence[float], k: int) -> int:
    """Dimension R_k of the piecewise-polynomial space at level kappa(k, alpha).

    Raises:
        OverflowError: if R_k does not fit a signed 64-bit integer.
    """
    l = multi_index(l)
    if len(l) != d or len(alpha) != d:
        raise ValueError("d, l and alpha disagree in length")
    kappa = kappa_of(k, alpha)
    r = (1 << sum(kappa)) * basis_size(l)
    if r > sys.maxsize:
        raise OverflowError(f"R_k = 2^{sum(kappa)} * {basis_size(l)} exceeds the integer range")
    return r


@dataclass(frozen=True, order=True)
class Cell:
    """Q_{kappa,nu} = 2^-kappa nu + 2^-kappa I^d."""

    level: MultiIndex
    position: MultiIndex

    def __post_init__(self):
        if len(self.level) != len(self.position):
            raise ValueError("level and position lengths differ")
        for kj, vj in zip(self.level, self.position):
            if not 0 <= vj < (1 << kj):
                raise ValueError(f"position {self.position} outside level {self.level}")

    @property
    def d(self) -> int:
        return len(self.level)

    @property
    def corner(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(v, 1 << k) for k, v in zip(self.level, self.position))

    @property
    def sides(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(1, 1 << k) for k in self.level)

    @property
    def volume(self) -> Fraction:
        return Fraction(1, 1 << sum(self.level))

    def lower(self) -> np.ndarray:
        return np.array([float(c) for c in self.corner])

    def upper(self) -> np.ndarray:
        return np.array([float(c + s) for c, s in zip(self.corner, self.sides)])


def n_cells(kappa: Sequence[int]) -> int:
    return 1 << sum(kappa)


def cell_positions(kappa: Sequence[int]) -> np.ndarray:
    """Integer array (2^{|kappa|}, d) of cell positions in lexicographic order."""
    grids = np.meshgrid(*(np.arange(1 << k) for k in kappa), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def cells_at(kappa: Sequence[int]) -> Iterator[Cell]:
    kappa = multi_index(kappa)
    for nu in itertools.product(*(range(1 << k) for k in kappa)):
        yield Cell(kappa, nu)


def cell_bounds(kappa: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    """Float lower/upper corners of every cell at level kappa, lexicographic."""
    h = np.array([2.0**-k for k in kappa])
    lo = cell_positions(kappa) * h
    return lo, lo + h


def cell_index(kappa: Sequence[int], x: np.ndarray) -> np.ndarray:
    """Flat lexicographic index of the cell owning each point (half-open, top face closed)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    idx = np.zeros(x.shape[0], dtype=np.int64)
    for j, k in enumerate(kappa):
        m = 1 << k
        nu = np.clip(np.floor(x[:, j] * m).astype(np.int64), 0, m - 1)
        idx = idx * m + nu
    return idx


def cell_nesting(c1: Cell, c2: Cell) -> bool:
    """True iff c1 is contained in c2 (closed cells)."""
    if c1.d != c2.d:
        raise ValueError("cells of different dimension")
    for k1, v1, k2, v2 in zip(c1.level, c1.position, c2.level, c2.position):
        # compare [v1, v1+1]/2^k1 with [v2, v2+1]/2^k2 on the common denominator
        s = max(k1, k2)
        a1, b1 = v1 << (s - k1), (v1 + 1) << (s - k1)
        a2, b2 = v2 << (s - k2), (v2 + 1) << (s - k2)
        if a1 < a2 or b1 > b2:
            return False
    return True
