"""Named test functions on the unit cube, used by the CLI and the embedding checks.

Names:
    linear              sum_j x_j
    abs-power:<g>       sum_j |x_j - 1/2|^g
    sin:<w>             prod_j sin(w pi x_j)
    bump                the tensor exponential bump
    zero                identically 0
    piecewise-poly:<f>  a PiecewisePoly stored as JSON in file f
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .asymptotics import bump_phi
from .polyspace import Function, GridFunction, PiecewisePoly

BUILTIN = ("linear", "abs-power:0.75", "sin:1", "bump", "zero")


def _split(name: str) -> tuple[str, str | None]:
    head, sep, arg = name.partition(":")
    return head, (arg if sep else None)


def catalog_function(name: str, d: int = 1) -> Function:
    """Look up a catalog function by name; raises KeyError for unknown names."""
    head, arg = _split(name)
    if head == "piecewise-poly":
        if not arg:
            raise KeyError("piecewise-poly needs a file: piecewise-poly:<path>")
        f = PiecewisePoly.from_json(Path(arg).read_text())
        if f.d != d:
            raise ValueError(f"{arg} holds a {f.d}-dimensional polynomial, expected d={d}")
        return f
    if d < 1:
        raise ValueError("d must be >= 1")
    if head == "linear" and arg is None:
        return GridFunction(lambda x: x.sum(axis=1), d, name)
    if head == "abs-power":
        g = float(arg) if arg else 1.0
        return GridFunction(lambda x: (np.abs(x - 0.5) ** g).sum(axis=1), d, name)
    if head == "sin":
        w = float(arg) if arg else 1.0
        return GridFunction(lambda x: np.prod(np.sin(w * np.pi * x), axis=1), d, name)
    if head == "bump" and arg is None:
        return GridFunction(bump_phi, d, name)
    if head == "zero" and arg is None:
        return GridFunction(lambda x: np.zeros(x.shape[0]), d, name)
    raise KeyError(f"unknown function {name!r}")
