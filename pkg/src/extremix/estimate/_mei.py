from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import TYPE_CHECKING, Literal

import numpy as np

from extremix._errors import UndefinedEstimateError
from extremix.core import as_index_set, as_tau, make_blocks, make_levels
from extremix.counts import event_indicator
from extremix.model import (
    IndexSet,
    InvarianceRow,
    InvarianceTable,
    MeiReport,
    Seed,
    ThetaEstimate,
)

if TYPE_CHECKING:
    from collections.abc import Callable, Iterable, Mapping, Sequence

    from extremix.core import IndexLike, TauLike
    from extremix.model import BlockScheme, CountKind, LevelPolicy, SeriesMatrix

logger = logging.getLogger(__name__)

SeMethod = Literal["bootstrap", "binomial"]

DEFAULT_BOOTSTRAP = 200
"""Number of block-bootstrap resamples for standard errors."""
CLAMP_SE = 3.0
"""θ̂ above 1 + CLAMP_SE·SE is clamped to 1."""


def block_bootstrap(
    k_n: int,
    statistic: Callable[[np.ndarray], np.ndarray | float],
    n_boot: int = DEFAULT_BOOTSTRAP,
    seed: Seed | int | None = None,
    threads: int | None = None,
) -> np.ndarray:
    """Evaluate `statistic` on `n_boot` resamples of whole blocks.

    `statistic` receives the resampled block indices. Resample b draws from
    `seed.child(b)`, and results come back in resample order, so the output
    does not depend on `threads`.
    """
    seed = Seed.coerce(seed)

    def _one(b: int) -> np.ndarray:
        idx = seed.child(b).rng().integers(0, k_n, size=k_n)
        return np.asarray(statistic(idx), dtype=float)

    if threads is not None and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_one, range(n_boot)))
    else:
        results = [_one(b) for b in range(n_boot)]
    return np.stack(results)


def nan_std(draws: np.ndarray) -> np.ndarray:
    """Sample standard deviation over axis 0, ignoring undefined (nan) draws."""
    draws = np.atleast_1d(np.asarray(draws, dtype=float))
    flat = draws.reshape(draws.shape[0], math.prod(draws.shape[1:]))
    flat = np.where(np.isfinite(flat), flat, np.nan)
    # fewer than two defined draws leave the column undefined
    enough = np.count_nonzero(~np.isnan(flat), axis=0) > 1
    out = np.full(flat.shape[1], np.nan)
    if enough.any():
        out[enough] = np.nanstd(flat[:, enough], axis=0, ddof=1)
    return out.reshape(draws.shape[1:])


def _as_float(x: float | np.floating) -> float | None:
    x = float(x)
    return x if math.isfinite(x) else None


def estimate_gamma(
    series: SeriesMatrix,
    tau: TauLike,
    J: IndexLike | None = None,
    kind: CountKind = "union",
    policy: LevelPolicy | None = None,
) -> float:
    """Γ̂ = n·P̂(kind-event), i.e. the number of event indices in the sample.

    For ``kind="star2"`` this is τ̂**_J(⋀_{j∈J} τ_j).

    Examples
    --------
    >>> import numpy as np
    >>> from extremix.model import SeriesMatrix
    >>> rows = np.array([[3.0, 1], [1, 3], [3, 3]])
    >>> s = SeriesMatrix(data=rows, margin_tag="unit_frechet")
    >>> estimate_gamma(s, (1.5, 1.5), kind="union")
    3.0
    """
    levels = make_levels(series, tau, policy)
    J = as_index_set(J, series.d)
    return float(np.count_nonzero(event_indicator(series, levels, J, kind)))


def _block_stats(
    series: SeriesMatrix,
    tau: TauLike,
    J: IndexSet,
    kind: CountKind,
    blocks: BlockScheme,
    policy: LevelPolicy | None,
) -> tuple[np.ndarray, float]:
    levels = make_levels(series, tau, policy)
    events = event_indicator(series, levels, J, kind)
    return blocks.reshape(events).sum(axis=1), float(np.count_nonzero(events))


def estimate_theta(
    series: SeriesMatrix,
    tau: TauLike,
    J: IndexLike | None = None,
    kind: CountKind = "union",
    k_n: int | None = None,
    *,
    policy: LevelPolicy | None = None,
    se_method: SeMethod = "bootstrap",
    n_boot: int = DEFAULT_BOOTSTRAP,
    seed: Seed | int | None = None,
    threads: int | None = None,
) -> ThetaEstimate:
    """Blocks estimate θ̂_J(τ) = (number of blocks with an event)/Γ̂.

    Parameters
    ----------
    series : SeriesMatrix
        The sample.
    tau : TauVector | Sequence[float]
        Rates defining the levels.
    J : IndexSet | Iterable[int], optional
        Margins (1-based). Defaults to all.
    kind : {"union", "star", "star2"}
        Which exceedance process.
    k_n : int, optional
        Number of blocks, default floor(sqrt(n)).
    policy : {"analytic_frechet", "empirical_quantile"}, optional
        Level policy, default from the series' margin tag.
    se_method : {"bootstrap", "binomial"}
        Block bootstrap over whole blocks, or the binomial approximation
        sqrt(k_n·p(1−p))/Γ̂ with p the fraction of nonzero blocks.
    n_boot : int
        Number of bootstrap resamples.
    seed : Seed | int, optional
        Stream for the bootstrap.
    threads : int, optional
        Worker threads for the bootstrap; results do not depend on it.

    Raises
    ------
    UndefinedEstimateError
        If Γ̂ = 0.
    """
    tau = as_tau(tau)
    J = as_index_set(J, series.d)
    blocks = make_blocks(series.n, k_n)
    per_block, gamma = _block_stats(series, tau, J, kind, blocks, policy)
    if gamma == 0:
        raise UndefinedEstimateError(
            f"θ̂ undefined: no {kind} events for J={J} at tau={tau.values}"
        )
    nonzero = int(np.count_nonzero(per_block))
    theta = nonzero / gamma

    se: float | None
    gamma_se: float | None = None
    if se_method == "binomial":
        p = nonzero / blocks.k_n
        se = math.sqrt(blocks.k_n * p * (1 - p)) / gamma
    elif se_method == "bootstrap" and n_boot < 2:
        se = None
    elif se_method == "bootstrap":
        # Γ̂ is re-estimated from the resampled blocks, scaled to n indices
        scale = series.n / blocks.used

        def _stat(idx: np.ndarray) -> np.ndarray:
            pb = per_block[idx]
            total = pb.sum() * scale
            theta_b = np.count_nonzero(pb) / total if total else math.nan
            return np.array([theta_b, total])

        draws = block_bootstrap(blocks.k_n, _stat, n_boot, seed, threads)
        se_theta, se_gamma = nan_std(draws)
        se, gamma_se = _as_float(se_theta), _as_float(se_gamma)
    else:
        raise ValueError(f"Invalid se_method {se_method!r}")

    clamped = False
    if theta > 1 + CLAMP_SE * (se or 0.0):
        logger.warning("Clamping θ̂_%s=%.4g (%s, SE %s) to 1", J, theta, kind, se)
        theta, clamped = 1.0, True

    logger.debug(
        "θ̂ %s J=%s tau=%s: %.6g (Γ̂=%g)", kind, J, tau.values, theta, gamma
    )
    return ThetaEstimate(
        kind=kind,
        J=J,
        tau=tau,
        theta=theta,
        gamma=gamma,
        nonzero_blocks=nonzero,
        k_n=blocks.k_n,
        n=series.n,
        se=se,
        gamma_se=gamma_se,
        se_method=se_method,
        clamped=clamped,
    )


def _try_theta(*args: object, **kwargs: object) -> ThetaEstimate | None:
    try:
        return estimate_theta(*args, **kwargs)  # type: ignore[arg-type]
    except UndefinedEstimateError as e:
        logger.debug("%s", e)
        return None


def _chain_ok(
    products: Sequence[tuple[float, float | None] | None], n_se: float = CLAMP_SE
) -> bool | None:
    """Whether a sequence of (value, se) pairs is nondecreasing up to n_se SEs."""
    if any(p is None for p in products):
        return None
    for (a, sa), (b, sb) in itertools.pairwise(products):  # type: ignore[misc]
        if a > b + n_se * math.hypot(sa or 0.0, sb or 0.0):
            return False
    return True


_THETA_NAMES = {
    "union": "theta_hat",
    "star": "theta_star_hat",
    "star2": "theta_star2_hat",
}
_RATE_NAMES = {"union": "gamma_hat", "star": "gamma_star_hat", "star2": "tau_star2_hat"}


def _standard_errors(
    est: Mapping[str, ThetaEstimate | None],
) -> dict[str, float | None]:
    out: dict[str, float | None] = {}
    for kind, e in est.items():
        out[_THETA_NAMES[kind]] = e.se if e else None
        out[_RATE_NAMES[kind]] = e.gamma_se if e else None
    return out


def estimate_mei(
    series: SeriesMatrix,
    tau: TauLike,
    J: IndexLike | None = None,
    k_n: int | None = None,
    *,
    policy: LevelPolicy | None = None,
    se_method: SeMethod = "bootstrap",
    n_boot: int = DEFAULT_BOOTSTRAP,
    seed: Seed | int | None = None,
    threads: int | None = None,
) -> MeiReport:
    """θ̂, θ̂*, θ̂** and their rates at τ, with a soft chain check.

    The chain θ̂**τ̂** ≤ θ̂*Γ̂* ≤ ⋁_j θ̂_jτ_j ≤ θ̂Γ̂ is checked
    up to 3 standard errors per step.

    A violated chain is logged as a warning, not raised.
    """
    tau = as_tau(tau)
    J = as_index_set(J, series.d)
    opts = {
        "k_n": k_n,
        "policy": policy,
        "se_method": se_method,
        "n_boot": n_boot,
        "seed": seed,
        "threads": threads,
    }
    est = {
        kind: _try_theta(series, tau, J, kind, **opts)
        for kind in ("union", "star", "star2")
    }
    marg = [_try_theta(series, tau, [j], "union", **opts) for j in J.members]
    blocks = make_blocks(series.n, k_n)

    def _product(e: ThetaEstimate | None) -> tuple[float, float | None] | None:
        if e is None:
            return None
        return e.theta_gamma, (e.se * e.gamma if e.se is not None else None)

    # ⋁_j θ̂_jτ_j with the SE of the maximizing margin
    marginal_max: tuple[float, float | None] | None = None
    if all(m is not None for m in marg):
        vals = [
            (m.theta * t, m.se * t if m.se is not None else None)
            for m, t in zip(marg, tau.subset(J).values)  # type: ignore[union-attr]
        ]
        marginal_max = max(vals, key=lambda v: v[0])

    chain = [
        _product(est["star2"]),
        _product(est["star"]),
        marginal_max,
        _product(est["union"]),
    ]
    chain_ok = _chain_ok(chain)
    if chain_ok is False:
        logger.warning("Estimated θ chain violated at tau=%s: %s", tau.values, chain)

    def _gamma(kind: str) -> float:
        e = est[kind]
        if e is not None:
            return e.gamma
        return estimate_gamma(series, tau, J, kind, policy)  # type: ignore[arg-type]

    return MeiReport(
        tau=tau,
        J=J,
        n=series.n,
        k_n=blocks.k_n,
        theta_hat=est["union"].theta if est["union"] else None,
        theta_star_hat=est["star"].theta if est["star"] else None,
        theta_star2_hat=est["star2"].theta if est["star2"] else None,
        gamma_hat=_gamma("union"),
        gamma_star_hat=_gamma("star"),
        tau_star2_hat=_gamma("star2"),
        marginal_thetas=tuple(m.theta if m else None for m in marg),
        standard_errors=_standard_errors(est),
        clamped=tuple(_THETA_NAMES[k] for k, e in est.items() if e and e.clamped),
        undefined=tuple(_THETA_NAMES[k] for k, e in est.items() if e is None),
        chain_ok=chain_ok,
    )


def estimate_theta_star2_invariance(
    series: SeriesMatrix,
    tau_grid: Iterable[TauLike],
    J: IndexLike | None = None,
    k_n: int | None = None,
    *,
    policy: LevelPolicy | None = None,
    n_boot: int = DEFAULT_BOOTSTRAP,
    seed: Seed | int | None = None,
    threads: int | None = None,
) -> InvarianceTable:
    """θ̂**_J on a τ grid, with the largest pairwise discrepancy.

    The pooled standard error is that of the most discrepant pair,
    sqrt(SE_a² + SE_b²).
    """
    grid = [as_tau(t) for t in tau_grid]
    if len(grid) < 3:
        raise ValueError(f"Need at least 3 tau vectors, got {len(grid)}")
    J = as_index_set(J, series.d)
    rows = []
    for tau in grid:
        e = _try_theta(
            series, tau, J, "star2", k_n, policy=policy, n_boot=n_boot, seed=seed,
            threads=threads,
        )
        rows.append(
            InvarianceRow(
                tau=tau,
                theta_star2=e.theta if e else None,
                se=e.se if e else None,
            )
        )
    defined = [r for r in rows if r.theta_star2 is not None]
    max_disc, pooled = 0.0, 0.0
    for a, b in itertools.combinations(defined, 2):
        disc = abs(a.theta_star2 - b.theta_star2)  # type: ignore[operator]
        if disc >= max_disc:
            max_disc, pooled = disc, math.hypot(a.se or 0.0, b.se or 0.0)
    return InvarianceTable(
        J=J,
        rows=tuple(rows),
        max_discrepancy=max_disc,
        pooled_se=pooled,
        consistent=max_disc <= CLAMP_SE * pooled or max_disc == 0.0,
    )
