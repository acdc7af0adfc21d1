"""Pure numpy implementations of the hot kernels.

Same signatures and semantics as the compiled ``_kernels`` module; used when
the extension is not built or ``BERNWIDTH_PURE_PYTHON=1`` is set.
"""
import numpy as np


def bump_sum(x, kappa, coef):
    """Sum_nu coef[nu] * phi(kappa x - nu) with phi the tensor exponential bump.

    ``coef`` is indexed by the flat lexicographic position of nu in the
    lattice 0 <= nu_j < kappa_j. Supports are disjoint, so each point only
    sees the bump of the lattice cell containing it.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    kappa = np.asarray(kappa, dtype=np.int64)
    m, d = x.shape
    flat = np.zeros(m, dtype=np.int64)
    val = np.ones(m)
    for j in range(d):
        s = x[:, j] * kappa[j]
        nu = np.floor(s)
        u = s - nu
        inside = (nu >= 0) & (nu < kappa[j]) & (u > 0.0)
        with np.errstate(divide="ignore", over="ignore"):
            phi = np.where(inside, np.exp(-1.0 / np.where(inside, u * (1.0 - u), 1.0)), 0.0)
        val *= phi
        flat = flat * kappa[j] + np.clip(nu, 0, kappa[j] - 1).astype(np.int64)
    return val * coef[flat]


def _norms(y, p):
    a = np.abs(y)
    if np.isinf(p):
        return a.max(axis=-1)
    if p == 1:
        return a.sum(axis=-1)
    if p == 2:
        return np.sqrt((a * a).sum(axis=-1))
    return (a**p).sum(axis=-1) ** (1.0 / p)


def gauge(y, rho, pexp):
    """Minkowski functional of the intersection of diagonal ellipsoids, row-wise."""
    out = np.zeros(y.shape[:-1])
    for r, p in zip(rho, pexp):
        out = np.maximum(out, _norms(y / r, p))
    return out


def subspace_ratios(y, rho, pexp, q):
    """||y||_q / mu(y) for every row of y; +inf where mu vanishes."""
    num = _norms(y, q)
    den = gauge(y, rho, pexp)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(den > 0, num / np.where(den > 0, den, 1.0), np.inf)


def pattern_search(c, basis, rho, pexp, q, sweeps, step0, min_step):
    """Compass search on the unit sphere of coefficient space, one start per row.

    Each sweep tries +-step along every coordinate (re-normalising) and keeps
    improvements; a sweep without improvement halves the step.
    """
    c = np.array(c, dtype=np.float64)
    c /= np.linalg.norm(c, axis=1, keepdims=True)
    k, n = c.shape
    vals = subspace_ratios(c @ basis, rho, pexp, q)
    step = np.full(k, float(step0))
    eye = np.eye(n)
    moves = np.concatenate([eye, -eye])
    for _ in range(int(sweeps)):
        active = step >= min_step
        if not active.any():
            break
        improved = np.zeros(k, dtype=bool)
        for mv in moves:
            trial = c + step[:, None] * mv
            trial /= np.linalg.norm(trial, axis=1, keepdims=True)
            tv = subspace_ratios(trial @ basis, rho, pexp, q)
            better = active & (tv < vals)
            c[better] = trial[better]
            vals[better] = tv[better]
            improved |= better
        step = np.where(active & ~improved, step * 0.5, step)
    return c, vals
