"""Validation, level construction and block schemes shared by every module."""

from __future__ import annotations

import logging
import math
from typing import TYPE_CHECKING, Any

import numpy as np

from extremix.model import (
    BlockScheme,
    IndexSet,
    LevelVector,
    M4Spec,
    SeriesMatrix,
    TauVector,
)

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

    from extremix.model import LevelPolicy

    TauLike = TauVector | Sequence[float] | float
    IndexLike = IndexSet | Iterable[int] | int

logger = logging.getLogger(__name__)


def as_tau(tau: TauLike) -> TauVector:
    """Coerce a sequence (or scalar) to a `TauVector`."""
    if isinstance(tau, TauVector):
        return tau
    return TauVector.model_validate(tau)


def as_index_set(J: IndexLike | None, d: int) -> IndexSet:
    """Coerce to an `IndexSet` within 1..d; None means the full set."""
    if J is None:
        return IndexSet.full(d)
    if not isinstance(J, IndexSet):
        J = IndexSet.model_validate(list(J) if not isinstance(J, int) else [J])
    return J.check_within(d)


def validate_m4_spec(spec: M4Spec | dict[str, Any]) -> M4Spec:
    """Return `spec` with margin sums s_j = Σ_{l,k} a_{l,k,j} filled in.

    Idempotent: validating a validated spec returns an equal spec.

    Examples
    --------
    >>> spec = validate_m4_spec({"d": 1, "signatures": [(1, 0, 1, 1.0)]})
    >>> spec.margin_sums
    (1.0,)
    >>> validate_m4_spec(spec) == spec
    True
    """
    if not isinstance(spec, M4Spec):
        spec = M4Spec.model_validate(spec)
    if spec.margin_sums:
        return spec
    validated = spec.model_copy(update={"margin_sums": spec.computed_sums()})
    logger.debug("Validated M4 spec with margin sums %s", validated.margin_sums)
    return validated


def analytic_levels(
    n: int, tau: TauLike, scales: Sequence[float] | None = None
) -> LevelVector:
    """Levels u_j = n·s_j/τ_j for Fréchet margins with scales s_j.

    >>> analytic_levels(1000, (2, 1)).u
    (500.0, 1000.0)
    """
    tau = as_tau(tau)
    scales = tuple(float(s) for s in scales) if scales is not None else None
    s = scales or (1.0,) * tau.d
    if len(s) != tau.d:
        raise ValueError(f"Invalid scales {scales!r} for a {tau.d}-dim tau")
    u = tuple(n * sj / tj for sj, tj in zip(s, tau.values))
    return LevelVector(u=u, tau=tau, policy="analytic_frechet", n=n, scales=scales)


def empirical_levels(series: SeriesMatrix, tau: TauLike) -> LevelVector:
    """Levels u_j at the empirical (1 − τ_j/n)-quantile of margin j.

    Uses the ranks/(n+1) plotting positions with linear interpolation.
    """
    tau = as_tau(tau)
    n = series.n
    if tau.d != series.d:
        raise ValueError(f"tau has dimension {tau.d}, series has {series.d}")
    if any(t >= n for t in tau.values):
        raise ValueError(f"Empirical levels need every tau < n={n}, got {tau.values!r}")
    data = series.data
    for j in range(series.d):
        col = data[:, j]
        if col.min() == col.max():
            raise ValueError(f"Cannot take empirical levels of constant column {j + 1}")
    probs = 1 - tau.as_array() / n
    u = tuple(
        float(np.quantile(data[:, j], probs[j], method="weibull"))
        for j in range(series.d)
    )
    return LevelVector(u=u, tau=tau, policy="empirical_quantile", n=n)


def default_policy(series: SeriesMatrix) -> LevelPolicy:
    """Analytic levels when the margins are known Fréchet, empirical otherwise."""
    if series.margin_tag in ("unit_frechet", "frechet"):
        return "analytic_frechet"
    return "empirical_quantile"


def make_levels(
    series: SeriesMatrix, tau: TauLike, policy: LevelPolicy | None = None
) -> LevelVector:
    """Thresholds u with n·P(X_j > u_j) ≈ τ_j.

    Parameters
    ----------
    series : SeriesMatrix
        The sample. Its length n and (for analytic levels) its Fréchet scales
        are used.
    tau : TauVector | Sequence[float]
        Rates, one per margin.
    policy : {"analytic_frechet", "empirical_quantile"}, optional
        Defaults to analytic for Fréchet-tagged series, empirical otherwise.

    Examples
    --------
    >>> import numpy as np
    >>> from extremix.model import SeriesMatrix
    >>> s = SeriesMatrix(data=np.ones((1000, 2)), margin_tag="unit_frechet")
    >>> make_levels(s, (1, 1)).u
    (1000.0, 1000.0)
    """
    tau = as_tau(tau)
    if tau.d != series.d:
        raise ValueError(f"tau has dimension {tau.d}, series has {series.d}")
    policy = policy or default_policy(series)
    if policy == "analytic_frechet":
        return analytic_levels(series.n, tau, series.scales)
    if policy == "empirical_quantile":
        return empirical_levels(series, tau)
    raise ValueError(f"Invalid level policy {policy!r}")


def relevel(series: SeriesMatrix, levels: LevelVector, tau: TauLike) -> LevelVector:
    """Re-apply the policy of `levels` at another τ."""
    tau = as_tau(tau)
    if levels.policy == "analytic_frechet":
        return analytic_levels(levels.n, tau, levels.scales)
    return empirical_levels(series, tau)


def common_levels(
    series: SeriesMatrix, levels: LevelVector, J: IndexSet
) -> LevelVector:
    """Levels of every margin at τ = ⋀_{j∈J} τ_j (the common level of N**)."""
    t = levels.tau.min_over(J)
    return relevel(series, levels, (t,) * levels.d)


def default_k_n(n: int) -> int:
    """floor(sqrt(n)), at least 1."""
    return max(1, math.isqrt(n))


def make_blocks(n: int, k_n: int | None = None) -> BlockScheme:
    """Partition 1..n into k_n blocks of length floor(n/k_n).

    >>> make_blocks(10, 3).r_n
    3
    >>> make_blocks(100).k_n
    10
    """
    if k_n is None:
        k_n = default_k_n(n)
    if not 1 <= k_n <= n:
        raise ValueError(f"Invalid k_n {k_n!r}: must lie in 1..n={n}")
    return BlockScheme(n=n, k_n=k_n)
