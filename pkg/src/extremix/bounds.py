"""Bounds on θ(τ) and on the χ gap between H and Ĥ.

Every bound is computed from one source of inputs: either closed forms
(`m4_bounds_report`) or estimates (`estimated_bounds_report`), never a mix.
"""

from __future__ import annotations

import logging
import math
from typing import TYPE_CHECKING

from extremix import theory
from extremix.core import as_tau, validate_m4_spec
from extremix.estimate import estimate_gamma, estimate_theta
from extremix.estimate._mei import DEFAULT_BOOTSTRAP, _try_theta
from extremix.model import BoundsReport, IndexSet

if TYPE_CHECKING:
    from collections.abc import Callable, Mapping, Sequence

    from extremix.core import TauLike
    from extremix.model import LevelPolicy, M4Spec, Seed, SeriesMatrix

    Star2Terms = Mapping[frozenset[int], float]

logger = logging.getLogger(__name__)

MAX_PERM_DIM = 10


def _check_gamma(gamma: float) -> None:
    if not gamma > 0:
        raise ValueError(f"Invalid gamma {gamma!r}: must be positive")


def _weighted(thetas: Sequence[float], tau: Sequence[float]) -> list[float]:
    if len(thetas) != len(tau):
        raise ValueError(f"{len(thetas)} thetas for a {len(tau)}-dim tau")
    return [t * x for t, x in zip(thetas, tau)]


def classic_bounds(
    thetas: Sequence[float], tau: TauLike, gamma: float
) -> tuple[float, float]:
    """⋁_j θ_jτ_j/Γ ≤ θ(τ) ≤ Σ_j θ_jτ_j/Γ.

    >>> classic_bounds((1, 1), (1, 1), 2.0)
    (0.5, 1.0)
    """
    _check_gamma(gamma)
    w = _weighted(thetas, as_tau(tau).values)
    return max(w) / gamma, math.fsum(w) / gamma


def new_upper_bound(
    thetas: Sequence[float],
    theta_star2_chain: Sequence[float],
    tau_star2_chain: Sequence[float],
    tau: TauLike,
    gamma: float,
) -> float:
    """Chain upper bound on θ(τ) over D_j = {j..d}.

        θ(τ) ≤ (Σ_j θ_jτ_j − Σ_{j<d} θ**_{D_j}τ**_{D_j}(⋀τ)) / Γ

    The two chains hold θ**_{D_j} and τ**_{D_j}(⋀_{i∈D_j} τ_i) for j = 1..d−1.

    >>> round(new_upper_bound((0.7, 0.5), (1.0,), (0.1,), (1, 1), 1.0), 12)
    1.1
    """
    _check_gamma(gamma)
    tau = as_tau(tau)
    d = tau.d
    if len(theta_star2_chain) != d - 1 or len(tau_star2_chain) != d - 1:
        raise ValueError(f"Expected chains of length d - 1 = {d - 1}")
    w = _weighted(thetas, tau.values)
    chain = [a * b for a, b in zip(theta_star2_chain, tau_star2_chain)]
    return (math.fsum(w) - math.fsum(chain)) / gamma


def chain_sum(star2_terms: Star2Terms, order: Sequence[int]) -> float:
    """Σ_{j<d} term[{π_j..π_d}] for one ordering π of the margins."""
    return math.fsum(
        star2_terms.get(frozenset(order[j:]), 0.0) for j in range(len(order) - 1)
    )


def _best_chain(d: int, star2_terms: Star2Terms) -> tuple[float, tuple[int, ...]]:
    """Largest chain sum over all orderings, and an ordering attaining it.

    best[S] = term[S] + max_{i∈S} best[S∖{i}], found by dynamic programming
    over subsets; ties go to the smallest dropped index.
    """
    full = (1 << d) - 1
    best: dict[int, tuple[float, int]] = {}
    for mask in range(1, full + 1):
        members = [i for i in range(d) if mask >> i & 1]
        if len(members) == 1:
            best[mask] = (0.0, members[0])
            continue
        own = star2_terms.get(frozenset(i + 1 for i in members), 0.0)
        score, first = max(
            ((best[mask & ~(1 << i)][0], i) for i in members),
            key=lambda s: (s[0], -s[1]),
        )
        best[mask] = (own + score, first)
    order, mask = [], full
    while mask:
        first = best[mask][1]
        order.append(first + 1)
        mask &= ~(1 << first)
    return best[full][0], tuple(order)


def perm_upper_bound(
    thetas: Sequence[float],
    star2_terms: Star2Terms,
    tau: TauLike,
    gamma: float,
) -> tuple[float, tuple[int, ...]]:
    """The `new_upper_bound` minimized over orderings of the margins.

    Parameters
    ----------
    thetas : Sequence[float]
        Marginal θ_j.
    star2_terms : Mapping[frozenset[int], float]
        θ**_Jτ**_J(⋀_{j∈J} τ_j) for index sets J (1-based) with |J| ≥ 2;
        missing sets count as 0.
    tau : TauVector | Sequence[float]
        Rates.
    gamma : float
        Γ(τ) > 0.

    Returns
    -------
    tuple[float, tuple[int, ...]]
        The bound and the ordering attaining it.

    >>> perm_upper_bound((1, 1), {frozenset({1, 2}): 0.5}, (1, 1), 2.0)
    (0.75, (1, 2))
    """
    _check_gamma(gamma)
    tau = as_tau(tau)
    if tau.d > MAX_PERM_DIM:
        raise ValueError(
            f"perm_upper_bound enumerates orderings only for d <= {MAX_PERM_DIM}, "
            f"got d={tau.d}"
        )
    w = _weighted(thetas, tau.values)
    chain, order = _best_chain(tau.d, star2_terms)
    return (math.fsum(w) - chain) / gamma, order


def ehlert_schlather_bound(gamma_one: float, thetas: Sequence[float]) -> float:
    """(Γ(1) − ⋁_j(1 − θ_j)) ∧ Σ_j θ_j, a bound on θ(1)Γ(1).

    >>> round(ehlert_schlather_bound(0.7 + 0.4 + 0.3 + 0.5, (0.7, 0.5)), 12)
    1.2
    """
    if gamma_one < 0 or any(t < 0 for t in thetas):
        raise ValueError("Inputs must be nonnegative")
    return min(gamma_one - max(1 - t for t in thetas), math.fsum(thetas))


def chi_gap_lower_bound(
    theta_star2: float, tau_star2_at_inv_max_theta: float, gamma11: float
) -> float:
    """max{θ**τ**(1/(θ_j ∨ θ_{j'})) − 2 + Γ(1,1), 1 − Γ(1,1)}.

    A lower bound on |χ^H − χ^Ĥ|, returned as computed (it may be negative).

    >>> chi_gap_lower_bound(1.0, 0.5, 1.0)
    0.0
    """
    return max(theta_star2 * tau_star2_at_inv_max_theta - 2 + gamma11, 1 - gamma11)


def _star2_terms(
    d: int, term: Callable[[IndexSet], float | None]
) -> dict[frozenset[int], float]:
    out = {}
    for mask in range(1, 1 << d):
        J = IndexSet.from_mask(mask)
        if len(J) >= 2 and (value := term(J)) is not None:
            out[frozenset(J.members)] = value
    return out


def _report(
    source: str,
    tau: TauLike,
    gamma: float,
    thetas: Sequence[float],
    star2_terms: dict[frozenset[int], float],
    theta_reference: float | None,
    theta_reference_se: float | None = None,
) -> BoundsReport:
    tau = as_tau(tau)
    d = tau.d
    lower, upper = classic_bounds(thetas, tau, gamma)
    # each chain entry is already the product θ**τ**
    chain = [star2_terms.get(frozenset(range(j, d + 1)), 0.0) for j in range(1, d)]
    new = new_upper_bound(thetas, chain, [1.0] * (d - 1), tau, gamma)
    perm, order = perm_upper_bound(thetas, star2_terms, tau, gamma)
    es = None
    if all(t == 1 for t in tau.values):
        es = ehlert_schlather_bound(gamma, thetas) / gamma
    if perm > upper:
        logger.info("Permutation bound %.6g exceeds classic upper %.6g", perm, upper)
    return BoundsReport(
        source=source,  # type: ignore[arg-type]
        tau=tau,
        gamma=gamma,
        thetas=tuple(thetas),
        classic_lower=lower,
        classic_upper=upper,
        new_upper=new,
        perm_upper=perm,
        perm_order=order,
        es_upper=es,
        theta_reference=theta_reference,
        theta_reference_se=theta_reference_se,
        perm_exceeds_classic=perm > upper,
    )


def m4_bounds_report(spec: M4Spec, tau: TauLike) -> BoundsReport:
    """All bounds from closed-form M4 inputs, with the closed-form θ(τ).

    The Ehlert–Schlather bound is included only at τ = (1, ..., 1).
    """
    spec = validate_m4_spec(spec)
    tau = as_tau(tau)
    terms = _star2_terms(spec.d, lambda J: theory.m4_theta_gamma(spec, tau, J, "star2"))
    return _report(
        "closed_form",
        tau,
        theory.m4_gamma(spec, tau),
        theory.marginal_thetas(spec),
        terms,
        theory.m4_theta(spec, tau),
    )


def estimated_bounds_report(
    series: SeriesMatrix,
    tau: TauLike,
    k_n: int | None = None,
    *,
    policy: LevelPolicy | None = None,
    n_boot: int = DEFAULT_BOOTSTRAP,
    seed: Seed | int | None = None,
    threads: int | None = None,
) -> BoundsReport:
    """All bounds from block estimates on one series, with θ̂(τ) as reference.

    Undefined star2 terms (no events) count as 0, which only loosens the bounds.
    """
    tau = as_tau(tau)
    opts = {"policy": policy, "n_boot": n_boot, "seed": seed, "threads": threads}
    gamma = estimate_gamma(series, tau, None, "union", policy)
    _check_gamma(gamma)
    thetas = [
        estimate_theta(
            series, tau, [j], "union", k_n, **opts  # type: ignore[arg-type]
        ).theta
        for j in range(1, series.d + 1)
    ]

    def _term(J: IndexSet) -> float | None:
        e = _try_theta(series, tau, J, "star2", k_n, **opts)
        return e.theta_gamma if e is not None else None

    ref = estimate_theta(
        series, tau, None, "union", k_n, **opts  # type: ignore[arg-type]
    )
    return _report(
        "estimated",
        tau,
        gamma,
        thetas,
        _star2_terms(series.d, _term),
        ref.theta,
        ref.se,
    )
