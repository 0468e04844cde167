from __future__ import annotations

import logging
import math
from typing import TYPE_CHECKING

import numpy as np
from scipy import stats

from extremix.model import TailCurve, TailReport

if TYPE_CHECKING:
    from collections.abc import Iterable

    from extremix.model import SeriesMatrix

logger = logging.getLogger(__name__)

DEFAULT_U_GRID = (0.9, 0.95, 0.975, 0.99, 0.995, 0.999)
MIN_JOINT = 50
"""Joint exceedances needed at a grid value to report it as the point estimate."""
MIN_HILL_K = 10


def _pair_columns(sample: SeriesMatrix, pair: tuple[int, int]) -> np.ndarray:
    j, jj = pair
    if not (1 <= j <= sample.d and 1 <= jj <= sample.d) or j == jj:
        raise ValueError(f"Invalid pair {pair!r} for d={sample.d}")
    return sample.data[:, [j - 1, jj - 1]]


def pseudo_observations(x: np.ndarray) -> np.ndarray:
    """Column ranks divided by n + 1."""
    return stats.rankdata(x, axis=0) / (x.shape[0] + 1)


def _check_grid(u_grid: Iterable[float]) -> np.ndarray:
    u = np.asarray(list(u_grid), dtype=float)
    if u.size == 0 or (u <= 0).any() or (u >= 1).any():
        raise ValueError(f"u_grid must be nonempty and inside (0, 1), got {u.tolist()}")
    if (np.diff(u) <= 0).any():
        raise ValueError("u_grid must be strictly increasing")
    return u


def _diag(pseudo: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Ĉ(u, u) and the number of rows with both pseudo-observations above u."""
    below = (pseudo[:, None, :] <= u[None, :, None]).all(axis=2)
    above = (pseudo[:, None, :] > u[None, :, None]).all(axis=2)
    return below.mean(axis=0), above.sum(axis=0)


def empirical_copula_diag(
    sample: SeriesMatrix, pair: tuple[int, int], u: float
) -> float:
    """Ĉ(u, u): fraction of rows with both rank-transformed margins ≤ u.

    >>> import numpy as np
    >>> from extremix.model import SeriesMatrix
    >>> x = np.arange(1.0, 10.0)
    >>> empirical_copula_diag(SeriesMatrix(data=np.c_[x, x]), (1, 2), 0.5)
    0.5555555555555556
    """
    if not 0 < u < 1:
        raise ValueError(f"Invalid u {u!r}: must lie in (0, 1)")
    pseudo = pseudo_observations(_pair_columns(sample, pair))
    return float(((pseudo[:, 0] <= u) & (pseudo[:, 1] <= u)).mean())


def _point(
    measure: str, u: np.ndarray, values: np.ndarray, joint: np.ndarray, min_joint: int
) -> tuple[float | None, float | None]:
    if values.size == 0:
        return None, None
    ok = np.flatnonzero(joint >= min_joint)
    if ok.size:
        i = ok[-1]
    else:
        i = 0
        logger.warning(
            "No grid value has %d joint exceedances; %s point estimate taken at "
            "u=%g",
            min_joint,
            measure,
            u[0],
        )
    return float(values[i]), float(u[i])


def estimate_chi(
    sample: SeriesMatrix,
    pair: tuple[int, int],
    u_grid: Iterable[float] = DEFAULT_U_GRID,
    *,
    extrapolate: bool = False,
    min_joint: int = MIN_JOINT,
) -> TailCurve:
    """χ̂(u) = 2 − log Ĉ(u, u)/log u on a grid, with a point estimate.

    The point estimate is the value at the largest u with at least `min_joint`
    joint exceedances. Grid values where Ĉ(u, u) = 0 are dropped. With
    `extrapolate`, a straight line in 1 − u is fitted and its value at u = 1
    is reported as well.
    """
    u = _check_grid(u_grid)
    pseudo = pseudo_observations(_pair_columns(sample, pair))
    c, joint = _diag(pseudo, u)
    keep = c > 0
    u_k, c_k, joint_k = u[keep], c[keep], joint[keep]
    chi = 2 - np.log(c_k) / np.log(u_k)
    point, point_u = _point("chi", u_k, chi, joint_k, min_joint)
    extrapolated = None
    if extrapolate and u_k.size >= 2:
        _slope, intercept = np.polyfit(1 - u_k, chi, 1)
        extrapolated = float(intercept)
    return TailCurve(
        measure="chi",
        u=tuple(u_k.tolist()),
        values=tuple(chi.tolist()),
        joint_exceedances=tuple(int(j) for j in joint_k),
        point=point,
        point_u=point_u,
        extrapolated=extrapolated,
        dropped=tuple(u[~keep].tolist()),
    )


def estimate_chibar(
    sample: SeriesMatrix,
    pair: tuple[int, int],
    u_grid: Iterable[float] = DEFAULT_U_GRID,
    *,
    min_joint: int = MIN_JOINT,
) -> TailCurve:
    """χ̄̂(u) = 2 log(1 − u)/log(1 − 2u + Ĉ(u, u)) − 1, clipped to [−1, 1].

    Grid values where the log argument is not positive are dropped.
    """
    u = _check_grid(u_grid)
    pseudo = pseudo_observations(_pair_columns(sample, pair))
    c, joint = _diag(pseudo, u)
    arg = 1 - 2 * u + c
    keep = arg > 0
    u_k, arg_k, joint_k = u[keep], arg[keep], joint[keep]
    chibar = np.clip(2 * np.log(1 - u_k) / np.log(arg_k) - 1, -1.0, 1.0)
    point, point_u = _point("chibar", u_k, chibar, joint_k, min_joint)
    return TailCurve(
        measure="chibar",
        u=tuple(u_k.tolist()),
        values=tuple(chibar.tolist()),
        joint_exceedances=tuple(int(j) for j in joint_k),
        point=point,
        point_u=point_u,
        dropped=tuple(u[~keep].tolist()),
    )


def estimate_madogram(sample: SeriesMatrix, pair: tuple[int, int]) -> float:
    """ν̂ = ½·mean|F̂_j(X_j) − F̂_{j'}(X_{j'})| with rank-based F̂.

    >>> import numpy as np
    >>> from extremix.model import SeriesMatrix
    >>> x = np.arange(1.0, 6.0)
    >>> estimate_madogram(SeriesMatrix(data=np.c_[x, x**3]), (1, 2))
    0.0
    """
    if sample.n < 2:
        raise ValueError(f"Madogram needs n >= 2, got {sample.n}")
    pseudo = pseudo_observations(_pair_columns(sample, pair))
    return float(0.5 * np.abs(pseudo[:, 0] - pseudo[:, 1]).mean())


def extremal_coeff_from_madogram(nu: float) -> float:
    """ε = (1 + 2ν)/(1 − 2ν), the inverse of ν = ½(ε − 1)/(ε + 1).

    >>> extremal_coeff_from_madogram(0.0)
    1.0
    """
    if not 0 <= nu < 0.5:
        raise ValueError(f"Invalid madogram {nu!r}: must lie in [0, 1/2)")
    return (1 + 2 * nu) / (1 - 2 * nu)


def default_hill_k(n: int) -> int:
    return int(math.floor(n**0.6))


def estimate_eta(
    sample: SeriesMatrix, pair: tuple[int, int], k: int | None = None
) -> float:
    """Hill estimate of η, the tail index of T = min(Z_j, Z_{j'}).

    Z are unit-Fréchet rank transforms −1/log F̂(X), so the estimate depends on
    the sample only through its ranks. Default k = floor(n^0.6).
    """
    n = sample.n
    k = default_hill_k(n) if k is None else k
    if k < MIN_HILL_K:
        raise ValueError(f"Hill estimator needs k >= {MIN_HILL_K}, got {k}")
    if k >= n:
        raise ValueError(f"Hill estimator needs k < n={n}, got {k}")
    pseudo = pseudo_observations(_pair_columns(sample, pair))
    t = (-1 / np.log(pseudo)).min(axis=1)
    top = np.sort(t)[::-1][: k + 1]
    return float(np.mean(np.log(top[:k] / top[k])))


def tail_report(
    sample: SeriesMatrix,
    pair: tuple[int, int] = (1, 2),
    u_grid: Iterable[float] = DEFAULT_U_GRID,
    *,
    eta_k: int | None = None,
    extrapolate: bool = False,
) -> TailReport:
    """χ̂, χ̄̂, madogram, extremal coefficient and η̂ of one margin pair.

    η̂ is omitted (None) when the sample is too short for the Hill estimator.
    """
    grid = list(u_grid)
    nu = estimate_madogram(sample, pair)
    eta: float | None = None
    k = default_hill_k(sample.n) if eta_k is None else eta_k
    if MIN_HILL_K <= k < sample.n:
        eta = estimate_eta(sample, pair, k)
    else:
        logger.info("Skipping η̂ for pair %s: k=%d, n=%d", pair, k, sample.n)
    return TailReport(
        pair=pair,
        n=sample.n,
        chi=estimate_chi(sample, pair, grid, extrapolate=extrapolate),
        chibar=estimate_chibar(sample, pair, grid),
        madogram=nu,
        extremal_coeff=extremal_coeff_from_madogram(nu),
        eta=eta,
        eta_k=k if eta is not None else None,
    )
