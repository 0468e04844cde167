"""Monte-Carlo estimators of extremal indices and tail dependence measures.

Block estimators (Γ̂, θ̂ of the three exceedance processes) work on a
`SeriesMatrix` with levels from `extremix.core.make_levels`. Tail measures
(χ̂, χ̄̂, ν̂, η̂) are rank based and invariant under increasing transformations
of each margin.
"""

from ._mei import (
    DEFAULT_BOOTSTRAP,
    block_bootstrap,
    estimate_gamma,
    estimate_mei,
    estimate_theta,
    estimate_theta_star2_invariance,
    nan_std,
)
from ._tail import (
    DEFAULT_U_GRID,
    empirical_copula_diag,
    estimate_chi,
    estimate_chibar,
    estimate_eta,
    estimate_madogram,
    extremal_coeff_from_madogram,
    pseudo_observations,
    tail_report,
)

__all__ = [
    "DEFAULT_BOOTSTRAP",
    "DEFAULT_U_GRID",
    "block_bootstrap",
    "empirical_copula_diag",
    "estimate_chi",
    "estimate_chibar",
    "estimate_eta",
    "estimate_gamma",
    "estimate_madogram",
    "estimate_mei",
    "estimate_theta",
    "estimate_theta_star2_invariance",
    "extremal_coeff_from_madogram",
    "nan_std",
    "pseudo_observations",
    "tail_report",
]
