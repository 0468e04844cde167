"""Closed forms for M4 processes and an exact finite-n oracle.

Every formula works on scale-corrected coefficients b_{l,k,j} = a_{l,k,j}/s_j,
so margins that are Fréchet with scale s_j are handled like unit ones when
levels are u_j = n·s_j/τ_j:

- Γ(τ)        = Σ_{l,k} ⋁_j b_{l,k,j}τ_j
- Γ*_J(τ)     = Σ_{l,k} ⋀_{j∈J} b_{l,k,j}τ_j
- Γ**_J(τ)    = Σ_{l,k} ⋀_{j∈J} b_{l,k,j} · ⋀_{j∈J}τ_j
- θ_J Γ_J     = Σ_l ⋁_k ⋁_{j∈J} b_{l,k,j}τ_j

and the starred θ·Γ products replace the inner ⋁_j by the matching ⋀_j.
"""

from __future__ import annotations

import itertools
import logging
import math
from typing import TYPE_CHECKING, Literal

import numpy as np

from extremix._errors import UndefinedEstimateError
from extremix.core import as_index_set, as_tau, validate_m4_spec
from extremix.model import MevDiag

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

    from extremix.core import IndexLike, TauLike
    from extremix.model import CountKind, LevelVector, M4Spec

logger = logging.getLogger(__name__)

HatMargins = Literal["independent", "total"]


def _scaled(spec: M4Spec, J: IndexLike | None) -> tuple[np.ndarray, tuple[int, ...]]:
    spec = validate_m4_spec(spec)
    J = as_index_set(J, spec.d)
    return spec.scaled_coefficients()[:, :, list(J.indices)], J.indices


def _tau_J(spec: M4Spec, tau: TauLike, idx: tuple[int, ...]) -> np.ndarray:
    tau = as_tau(tau)
    if tau.d != spec.d:
        raise ValueError(f"tau has dimension {tau.d}, spec has d={spec.d}")
    return tau.as_array()[list(idx)]


def _star(b: np.ndarray, t: np.ndarray) -> float:
    return math.fsum((b * t).min(axis=-1).ravel())


def _star2(b: np.ndarray, t: np.ndarray) -> float:
    return math.fsum(b.min(axis=-1).ravel()) * float(t.min())


def m4_gamma(
    spec: M4Spec, tau: TauLike, J: IndexLike | None = None, kind: CountKind = "union"
) -> float:
    """Limit rate Γ_J(τ) of the union, star or star2 exceedance process.

    The union rate is assembled by inclusion–exclusion over the star rates,
    Γ_J = Σ_{∅≠I⊆J} (−1)^{|I|+1} Γ*_I.

    Examples
    --------
    >>> from extremix.model import M4Spec
    >>> ex3 = M4Spec(d=2, signatures=[(1, 0, 1, 6/8), (1, 0, 2, 5/8),
    ...     (1, 1, 1, 1/8), (1, 1, 2, 1/8), (1, 2, 1, 1/8), (1, 2, 2, 2/8)])
    >>> round(m4_gamma(ex3, (1, 1)), 12)
    1.125
    """
    b, idx = _scaled(spec, J)
    t = _tau_J(spec, tau, idx)
    if kind == "star":
        return _star(b, t)
    if kind == "star2":
        return _star2(b, t)
    if kind != "union":
        raise ValueError(f"Invalid count kind {kind!r}")
    terms = []
    m = len(idx)
    for size in range(1, m + 1):
        sign = 1 if size % 2 else -1
        for sub in itertools.combinations(range(m), size):
            terms.append(sign * _star(b[:, :, list(sub)], t[list(sub)]))
    return math.fsum(terms)


def m4_theta_gamma(
    spec: M4Spec, tau: TauLike, J: IndexLike | None = None, kind: CountKind = "union"
) -> float:
    """The product θ_J(τ)·Γ_J(τ) of the given kind (θ**τ** for star2).

    >>> from extremix.model import M4Spec
    >>> ex2 = M4Spec(d=2, signatures=[(1, 0, 1, 0.7), (1, 2, 1, 0.3),
    ...     (1, 1, 2, 0.7), (1, 2, 2, 0.1), (1, 3, 2, 0.5)])
    >>> round(m4_theta_gamma(ex2, (1, 1)), 12)
    0.7
    """
    b, idx = _scaled(spec, J)
    t = _tau_J(spec, tau, idx)
    if kind == "union":
        per = (b * t).max(axis=-1)
    elif kind == "star":
        per = (b * t).min(axis=-1)
    elif kind == "star2":
        per = b.min(axis=-1) * float(t.min())
    else:
        raise ValueError(f"Invalid count kind {kind!r}")
    return math.fsum(per.max(axis=1))


def m4_theta(
    spec: M4Spec, tau: TauLike, J: IndexLike | None = None, kind: CountKind = "union"
) -> float:
    """Extremal index θ_J(τ) of the given kind.

    Raises `UndefinedEstimateError` when the matching rate is zero (for example
    the star index of a spec whose margins never share a signature).

    >>> from extremix.model import M4Spec
    >>> ex2 = M4Spec(d=2, signatures=[(1, 0, 1, 0.7), (1, 2, 1, 0.3),
    ...     (1, 1, 2, 0.7), (1, 2, 2, 0.1), (1, 3, 2, 0.5)])
    >>> round(m4_theta(ex2, (1, 1), J=[1]), 12)
    0.7
    """
    gamma = m4_gamma(spec, tau, J, kind)
    if gamma <= 0:
        raise UndefinedEstimateError(f"θ undefined: the {kind} rate is zero")
    return m4_theta_gamma(spec, tau, J, kind) / gamma


def marginal_thetas(spec: M4Spec) -> tuple[float, ...]:
    """θ_j = Σ_l ⋁_k b_{l,k,j} for every margin."""
    b = validate_m4_spec(spec).scaled_coefficients()
    return tuple(math.fsum(col) for col in b.max(axis=1).T)


def exact_joint_cdf_m4(
    spec: M4Spec, n: int, u: LevelVector | Sequence[float], log: bool = False
) -> float:
    """Exact P(M_{n,1} ≤ u_1, ..., M_{n,d} ≤ u_d) for an M4 process.

    Each latent Z_{l,m}, m = 1−K..n, must stay below u_j/a_{l,k,j} for every
    (i, j) it reaches, so

        −log P = Σ_l Σ_m ⋁_{k: 1 ≤ m+k ≤ n} ⋁_j a_{l,k,j}/u_j.

    Latent times that reach every lag share one term; only the K edge times on
    each side are enumerated.

    Examples
    --------
    >>> import math
    >>> from extremix.model import M4Spec
    >>> spec = M4Spec(d=1, signatures=[(1, 0, 1, 1.0)])
    >>> math.isclose(exact_joint_cdf_m4(spec, 1, [1.0]), math.exp(-1))
    True
    """
    if n < 1:
        raise ValueError(f"Invalid n {n!r}: must be >= 1")
    spec = validate_m4_spec(spec)
    levels = np.asarray(u.u if not isinstance(u, list | tuple | np.ndarray) else u)
    if levels.shape != (spec.d,):
        raise ValueError(f"Expected {spec.d} levels, got shape {levels.shape}")
    r = spec.coefficients() / levels  # (L, K+1, d)
    per_lag = r.max(axis=2)  # (L, K+1)
    K = per_lag.shape[1] - 1
    terms: list[float] = []
    full = n - K  # latent times m = 1..n-K reach every lag
    if full > 0:
        terms.extend(full * per_lag.max(axis=1))
    edges = itertools.chain(range(1 - K, 1), range(max(1, n - K + 1), n + 1))
    for m in edges:
        lo, hi = max(0, 1 - m), min(K, n - m)
        if lo <= hi:
            terms.extend(per_lag[:, lo : hi + 1].max(axis=1))
    neg_log = math.fsum(terms)
    return -neg_log if log else math.exp(-neg_log)


def _pairs(d: int) -> list[tuple[int, int]]:
    return list(itertools.combinations(range(1, d + 1), 2))


def mev_diag_exponents(spec: M4Spec) -> tuple[MevDiag, MevDiag]:
    """Diagonal exponents of the Ĥ and H copulas for every margin pair.

    ε^Ĥ_{jj'} = Γ_{jj'}(1, 1) and ε^H_{jj'} = (θΓ)_{jj'}(1/θ_j, 1/θ_{j'}).

    Returns
    -------
    tuple[MevDiag, MevDiag]
        ``(hat, limit)`` with sources ``"F_hat_H"`` and ``"H"``.
    """
    spec = validate_m4_spec(spec)
    thetas = marginal_thetas(spec)
    pairs = _pairs(spec.d)
    ones = (1.0,) * spec.d
    hat, lim = [], []
    for j, jj in pairs:
        J = (j, jj)
        hat.append(m4_gamma(spec, ones, J))
        tau = [1.0] * spec.d
        tau[j - 1], tau[jj - 1] = 1 / thetas[j - 1], 1 / thetas[jj - 1]
        lim.append(m4_theta_gamma(spec, tau, J))
    return (
        MevDiag(source="F_hat_H", pairs=tuple(pairs), eps=tuple(hat)),
        MevDiag(source="H", pairs=tuple(pairs), eps=tuple(lim)),
    )


def chi_from_theta(
    theta_pair: float,
    gamma_pair: float | None = None,
    thetas: tuple[float, float] | None = None,
    hat_margins: HatMargins | None = None,
) -> float:
    """χ^H = 2 − θ_{jj'}(1/θ_j, 1/θ_{j'})·Γ_{jj'}(1/θ_j, 1/θ_{j'}).

    Without `gamma_pair`, Γ at (1/θ_j, 1/θ_{j'}) follows from the margins of Ĥ:
    ``"independent"`` gives 1/θ_j + 1/θ_{j'}, ``"total"`` gives 1/θ_j ∨ 1/θ_{j'}.

    >>> abs(chi_from_theta(8 / 9, 9 / 7) - 6 / 7) < 1e-12
    True
    """
    if gamma_pair is None:
        if thetas is None or hat_margins is None:
            raise ValueError(
                "Without gamma_pair both thetas and hat_margins are needed"
            )
        inv = (1 / thetas[0], 1 / thetas[1])
        if hat_margins == "independent":
            gamma_pair = inv[0] + inv[1]
        elif hat_margins == "total":
            gamma_pair = max(inv)
        else:
            raise ValueError(f"Invalid hat_margins {hat_margins!r}")
    chi = 2 - theta_pair * gamma_pair
    if not -1e-12 <= chi <= 1 + 1e-12:
        raise ValueError(
            f"Inconsistent inputs: χ^H = {chi!r} outside [0, 1] "
            f"(θ={theta_pair!r}, Γ={gamma_pair!r})"
        )
    return min(max(chi, 0.0), 1.0)


def _chibar_diag(u: np.ndarray, eps: float) -> np.ndarray:
    w = 1 - u
    # 1 − 2u + u^ε, computed from w = 1 − u without cancellation
    joint = 2 * w + np.expm1(eps * np.log1p(-w))
    return 2 * np.log(w) / np.log(joint) - 1


def _extrapolate_to_one(u: np.ndarray, values: np.ndarray) -> float:
    # χ̄(u) is linear in 1/log(1−u) to first order
    x = 1 / np.log(1 - u)
    _slope, intercept = np.polyfit(x, values, 1)
    return float(intercept)


DEFAULT_CHIBAR_GRID = tuple(1 - 10.0**-k for k in range(4, 13))


def chibar_equality_check(
    spec: M4Spec,
    u_grid: Iterable[float] = DEFAULT_CHIBAR_GRID,
    pairs: Iterable[tuple[int, int]] | None = None,
) -> dict[str, object]:
    """Compare χ̄ of the H and Ĥ diagonals u^{ε^H} and u^{ε^Ĥ}.

    Returns
    -------
    dict
        ``gaps``: per pair, the gap |χ̄^H(u) − χ̄^Ĥ(u)| at each grid value;
        ``extrapolated``: per pair, the gap of the curves extrapolated to u → 1;
        ``max_gap`` and ``max_extrapolated_gap`` over all pairs.
    """
    u = np.asarray(sorted(u_grid), dtype=float)
    if u.size < 2 or (u <= 0).any() or (u >= 1).any():
        raise ValueError("u_grid needs at least two values in (0, 1)")
    hat, lim = mev_diag_exponents(spec)
    gaps: dict[str, list[float]] = {}
    extrap: dict[str, float] = {}
    for pair in pairs or hat.pairs:
        key = f"{pair[0]},{pair[1]}"
        c_hat = _chibar_diag(u, hat.eps_for(pair))
        c_lim = _chibar_diag(u, lim.eps_for(pair))
        gaps[key] = np.abs(c_lim - c_hat).tolist()
        extrap[key] = abs(_extrapolate_to_one(u, c_lim) - _extrapolate_to_one(u, c_hat))
    return {
        "u": u.tolist(),
        "gaps": gaps,
        "extrapolated": extrap,
        "max_gap": max((max(g) for g in gaps.values()), default=0.0),
        "max_extrapolated_gap": max(extrap.values(), default=0.0),
    }


def madogram_from_eps(eps: float) -> float:
    """ν = ½(ε − 1)/(ε + 1).

    >>> madogram_from_eps(2.0) == 1 / 6
    True
    """
    if not 1 - 1e-12 <= eps <= 2 + 1e-12:
        raise ValueError(f"Invalid extremal coefficient {eps!r}: must lie in [1, 2]")
    return 0.5 * (eps - 1) / (eps + 1)


def m4_madogram(spec: M4Spec, pair: tuple[int, int]) -> tuple[float, float]:
    """Closed-form madograms (ν^Ĥ, ν^H) of one margin pair."""
    hat, lim = mev_diag_exponents(spec)
    return madogram_from_eps(hat.eps_for(pair)), madogram_from_eps(lim.eps_for(pair))


def limit_cdfs(
    spec: M4Spec, x: Sequence[float] | np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Ĥ(x) = exp(−Γ(1/x)) and H(x) = exp(−θΓ(1/x)) on scale-corrected margins.

    `x` has shape (d,) or (m, d); margin j is evaluated at n·s_j·x_j.
    """
    b = validate_m4_spec(spec).scaled_coefficients()
    xs = np.atleast_2d(np.asarray(x, dtype=float))
    if xs.shape[-1] != b.shape[2] or (xs <= 0).any():
        raise ValueError(f"x must be positive with {b.shape[2]} columns")
    tau = 1 / xs  # (m, d)
    bt = b[None] * tau[:, None, None, :]  # (m, L, K+1, d)
    gamma = bt.max(axis=-1).sum(axis=(1, 2))
    theta_gamma = bt.max(axis=-1).max(axis=2).sum(axis=1)
    h_hat, h = np.exp(-gamma), np.exp(-theta_gamma)
    if np.ndim(x) == 1:
        return h_hat[0], h[0]
    return h_hat, h


def default_tau_grid(d: int) -> list[tuple[float, ...]]:
    """All τ in {1, 2, 3}^d (capped at d = 8)."""
    if d > 8:
        raise ValueError(f"Default tau grid is limited to d <= 8, got {d}")
    return list(itertools.product((1.0, 2.0, 3.0), repeat=d))


def is_theta_constant(
    spec: M4Spec,
    tau_grid: Iterable[TauLike] | None = None,
    tol: float = 1e-12,
) -> bool:
    """Whether θ(τ) takes a single value on a τ grid."""
    spec = validate_m4_spec(spec)
    grid = list(tau_grid) if tau_grid is not None else default_tau_grid(spec.d)
    values = [m4_theta(spec, t) for t in grid]
    return max(values) - min(values) <= tol
