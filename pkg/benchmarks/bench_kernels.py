"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints best-of-N wall time per kernel and backend, the speedup, and the
largest absolute difference between the two outputs.
"""
import argparse
import timeit

import numpy as np

from bernwidth import _fallback

try:
    from bernwidth import _kernels
except ImportError:  # extension not built
    _kernels = None


def cases(rng):
    x = rng.random((200_000, 2))
    kappa = np.array([16, 16], dtype=np.int64)
    coef = rng.standard_normal(256)
    yield "bump_sum", (x, kappa, coef)

    n_dim = 64
    y = rng.standard_normal((4096, n_dim))
    rho = np.stack([np.sort(rng.uniform(0.1, 1, n_dim))[::-1], rng.uniform(0.2, 1, n_dim)])
    pexp = np.array([1.0, np.inf])
    yield "subspace_ratios", (y, rho, pexp, 2.0)

    basis = np.linalg.qr(rng.standard_normal((n_dim, 4)))[0].T.copy()
    c0 = rng.standard_normal((8, 4))
    c0 /= np.linalg.norm(c0, axis=1, keepdims=True)
    yield "pattern_search", (c0, basis, rho, pexp, 3.0, 100, 0.5, 1e-8)


def _first(out):
    return out[1] if isinstance(out, tuple) else out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    if _kernels is None:
        print("compiled extension not available; timing the fallback only")
    print(f"{'kernel':<16} {'python [ms]':>12} {'cython [ms]':>12} {'speedup':>8} {'max |diff|':>11}")
    for name, call_args in cases(rng):
        py = getattr(_fallback, name)
        t_py = min(timeit.repeat(lambda: py(*call_args), number=1, repeat=args.repeat))
        if _kernels is None:
            print(f"{name:<16} {t_py * 1e3:12.2f}")
            continue
        cy = getattr(_kernels, name)
        t_cy = min(timeit.repeat(lambda: cy(*call_args), number=1, repeat=args.repeat))
        diff = float(np.max(np.abs(_first(py(*call_args)) - _first(cy(*call_args)))))
        print(f"{name:<16} {t_py * 1e3:12.2f} {t_cy * 1e3:12.2f} {t_py / t_cy:8.1f} {diff:11.2e}")


if __name__ == "__main__":
    main()
