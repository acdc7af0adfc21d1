"""Numerical experiments on Bernstein widths of anisotropic Besov classes.

Piecewise polynomial spaces on anisotropic dyadic grids, their local L2
projectors, averaged moduli of continuity with the primed Nikolskii/Besov
norms, widths of finite-dimensional ellipsoids, and the rate pipelines that
tie them together.
"""
from importlib.metadata import PackageNotFoundError, version as _dist_version

try:
    __version__ = _dist_version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from ._core import BACKEND
from .asymptotics import (
    BumpSystem,
    InapplicableRegime,
    Regime,
    bump_norm_identity,
    bump_phi,
    bump_system,
    choose_k,
    classify,
    constructive_lower_certificate,
    lower_bound_value,
    upper_bound_value,
)
from .catalog import catalog_function
from .fdwidths import (
    Ellipsoid,
    Intersection,
    minkowski,
    width_box_l2_upper,
    width_ellipsoid_exact,
    width_on_subspace,
    width_oracle,
    width_shell_lower_rate,
)
from .indexgrid import AnisoParams, Cell, big_kappa_of, cell_nesting, cells_at, dim_space, kappa_of
from .moduli import PrimedNorms, affine_transfer, b_prime_norm, h_prime_norm, omega_avg
from .polyspace import GridFunction, PiecewisePoly, eval, iso_Ik, iso_Ik_inverse, lp_norm
from .projectors import E_k, E_kappa, ProjectorConfig, approx_error, calE_k, frakE, local_project

__all__ = [name for name in dir() if not name.startswith("_")]
