"""Kernel backend selection.

The compiled extension is used when importable; ``BERNWIDTH_PURE_PYTHON=1``
forces the numpy fallback.
"""
import os

from . import _fallback

BACKEND = "python"
kernels = _fallback

if os.environ.get("BERNWIDTH_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        kernels = _compiled
        BACKEND = "cython"

bump_sum = kernels.bump_sum
subspace_ratios = kernels.subspace_ratios
pattern_search = kernels.pattern_search

__all__ = ["BACKEND", "bump_sum", "subspace_ratios", "pattern_search"]
