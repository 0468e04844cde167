"""Multivariate extremal index toolkit.

extremix computes the multivariate extremal index θ(τ) of stationary
d-dimensional sequences and the related tail dependence measures. For the
maxima-of-moving-maxima (M4) family it gives exact closed forms; for any
sample it gives block estimators of the three exceedance processes (union,
joint at own levels, joint at a common level), bounds on θ(τ), finite-sample
checks of two decomposition identities and rank-based χ, χ̄, madogram and η.

Quick Start
-----------
Closed form and estimate of θ for a one-factor M4 process::

    import extremix as xm

    spec = xm.M4Spec(d=2, signatures=[(1, 0, 1, 0.75), (1, 0, 2, 0.625),
                                      (1, 1, 1, 0.25), (1, 1, 2, 0.375)])
    xm.m4_theta(spec, (1, 1))
    series = xm.simulate_m4(spec, 100_000, seed=0)
    xm.estimate_theta(series, (1, 1)).theta

See Also
--------
- extremix.model: Immutable inputs and report types
- extremix.theory: M4 closed forms and the exact finite-n oracle
- extremix.estimate: Block and rank-based estimators
- extremix.cli: The ``extremix`` experiment runner
"""

from __future__ import annotations

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("extremix")
except PackageNotFoundError:
    __version__ = "uninstalled"

from ._errors import UndefinedEstimateError
from .bounds import (
    classic_bounds,
    ehlert_schlather_bound,
    estimated_bounds_report,
    m4_bounds_report,
    new_upper_bound,
    perm_upper_bound,
)
from .core import make_blocks, make_levels, validate_m4_spec
from .counts import count_blocks, mean_cluster_size
from .decomp import check_prop2_identity, check_prop3_identity
from .estimate import (
    estimate_chi,
    estimate_chibar,
    estimate_eta,
    estimate_madogram,
    estimate_mei,
    estimate_theta,
    tail_report,
)
from .model import (
    BlockScheme,
    GaussFrechetSpec,
    IndexSet,
    LevelVector,
    M4Spec,
    Seed,
    SeriesMatrix,
    TauVector,
)
from .simulate import (
    block_maxima,
    simulate_gauss_frechet,
    simulate_iid_frechet,
    simulate_m4,
)
from .theory import (
    exact_joint_cdf_m4,
    m4_gamma,
    m4_theta,
    mev_diag_exponents,
)

__all__ = [
    "BlockScheme",
    "GaussFrechetSpec",
    "IndexSet",
    "LevelVector",
    "M4Spec",
    "Seed",
    "SeriesMatrix",
    "TauVector",
    "UndefinedEstimateError",
    "block_maxima",
    "check_prop2_identity",
    "check_prop3_identity",
    "classic_bounds",
    "count_blocks",
    "ehlert_schlather_bound",
    "estimate_chi",
    "estimate_chibar",
    "estimate_eta",
    "estimate_madogram",
    "estimate_mei",
    "estimate_theta",
    "estimated_bounds_report",
    "exact_joint_cdf_m4",
    "m4_bounds_report",
    "m4_gamma",
    "m4_theta",
    "make_blocks",
    "make_levels",
    "mean_cluster_size",
    "mev_diag_exponents",
    "new_upper_bound",
    "perm_upper_bound",
    "simulate_gauss_frechet",
    "simulate_iid_frechet",
    "simulate_m4",
    "tail_report",
    "validate_m4_spec",
]
