"""Decomposition terms β⁽¹⁾, β⁽²⁾, Θ_J and finite-n identity checks.

``prop2``::

    θΓ = θ**τ**(⋀τ) + θ*Γ*β⁽¹⁾ + Σ_{∅≠J⊆D} (−1)^{|J|+1} Θ_J

``prop3a``, with D_j = {j..d}::

    θΓ = Σ_j θ_jτ_j − Σ_{j<d} [θ**τ**_{D_j} + θ*Γ*β⁽¹⁾_{D_j}
         + Σ_{∅≠J⊆{j+1..d}} (−1)^{|J|+1} β⁽²⁾_{{j}∪J}]

Every unconditional term is a count of blocks and every conditional term a
ratio of block fractions, so both identities hold at finite n up to the
P̂(N* = 0) normalizations. Terms whose conditioning event is empty are
reported as undefined and the check becomes partial.
"""

from __future__ import annotations

import logging
import math
from typing import TYPE_CHECKING

import numpy as np

from extremix._errors import UndefinedEstimateError
from extremix.core import as_index_set, as_tau, common_levels, make_levels
from extremix.counts import MAX_SUBSET_DIM, exceedances
from extremix.estimate._mei import DEFAULT_BOOTSTRAP, block_bootstrap, nan_std
from extremix.model import DecompReport, IndexSet

if TYPE_CHECKING:
    from collections.abc import Callable

    from extremix.core import IndexLike, TauLike
    from extremix.model import BlockScheme, LevelPolicy, Seed, SeriesMatrix

    _Terms = dict[str, tuple[Callable, int]]

logger = logging.getLogger(__name__)


class BlockFlags:
    """Per-block positivity flags of the processes the decompositions need.

    Attributes
    ----------
    margin : np.ndarray
        (k_n, d) bool, N_{r_n,{j}} > 0.
    """

    def __init__(
        self,
        series: SeriesMatrix,
        tau: TauLike,
        blocks: BlockScheme,
        policy: LevelPolicy | None = None,
    ) -> None:
        if blocks.n != series.n:
            raise ValueError(
                f"block scheme is for n={blocks.n}, series has n={series.n}"
            )
        self.series = series
        self.blocks = blocks
        self.levels = make_levels(series, tau, policy)
        exc = exceedances(series, self.levels)
        self._exc = blocks.reshape(exc)  # (k, r, d)
        self.margin = self._exc.any(axis=1)
        self._cache: dict[tuple[str, int], np.ndarray] = {}

    @property
    def k_n(self) -> int:
        return self.blocks.k_n

    def star(self, J: IndexSet) -> np.ndarray:
        """N*_{r_n,J} > 0 per block."""
        key = ("star", J.mask)
        if key not in self._cache:
            self._cache[key] = self._exc[:, :, list(J.indices)].all(axis=2).any(axis=1)
        return self._cache[key]

    def star2(self, J: IndexSet) -> np.ndarray:
        """N**_{r_n,J} > 0 per block."""
        key = ("star2", J.mask)
        if key not in self._cache:
            common = common_levels(self.series, self.levels, J)
            exc = self.blocks.reshape(exceedances(self.series, common))
            self._cache[key] = exc[:, :, list(J.indices)].all(axis=2).any(axis=1)
        return self._cache[key]

    def union(self, J: IndexSet) -> np.ndarray:
        """N_{r_n,J} > 0 per block."""
        return self.margin[:, list(J.indices)].any(axis=1)

    def all_margins(self, J: IndexSet) -> np.ndarray:
        """N_{r_n,{j}} > 0 for every j ∈ J."""
        return self.margin[:, list(J.indices)].all(axis=1)


def _ratio(num: np.ndarray, den: np.ndarray, idx: np.ndarray | None = None) -> float:
    if idx is not None:
        num, den = num[idx], den[idx]
    d = np.count_nonzero(den)
    return np.count_nonzero(num & den) / d if d else math.nan


def _count(flags: np.ndarray, idx: np.ndarray | None = None) -> float:
    return float(np.count_nonzero(flags if idx is None else flags[idx]))


def estimate_beta1(
    series: SeriesMatrix,
    tau: TauLike,
    J: IndexLike | None,
    blocks: BlockScheme,
    *,
    policy: LevelPolicy | None = None,
) -> float:
    """β̂⁽¹⁾_J: fraction of blocks with N*_J > 0 that have N**_J = 0.

    Raises
    ------
    UndefinedEstimateError
        If no block has N*_J > 0.
    """
    flags = BlockFlags(series, tau, blocks, policy)
    J = as_index_set(J, series.d)
    star = flags.star(J)
    if not star.any():
        raise UndefinedEstimateError(
            f"β̂⁽¹⁾ undefined: no block with N*_{J} > 0"
        )
    return _ratio(~flags.star2(J), star)


def estimate_Theta_caps(
    series: SeriesMatrix,
    tau: TauLike,
    J: IndexLike | None,
    blocks: BlockScheme,
    *,
    given: IndexLike | None = None,
    policy: LevelPolicy | None = None,
) -> float:
    """Θ̂_J = k_n·P̂(N_{r_n,{j}} > 0 ∀j∈J | N*_{r_n,G} = 0).

    G is `given`, all margins by default.

    With G = {j..d} and J = {j} ∪ J' this is β̂⁽²⁾_{{j}∪J'}.

    Raises
    ------
    UndefinedEstimateError
        If every block has N*_G > 0.
    """
    flags = BlockFlags(series, tau, blocks, policy)
    J = as_index_set(J, series.d)
    G = as_index_set(given, series.d)
    quiet = ~flags.star(G)
    if not quiet.any():
        raise UndefinedEstimateError(f"Θ̂_{J} undefined: every block has N*_{G} > 0")
    return flags.k_n * _ratio(flags.all_margins(J), quiet)


def _signed_subsets(members: tuple[int, ...]) -> list[tuple[IndexSet, int]]:
    out = []
    for mask in range(1, 1 << len(members)):
        sub = [m for i, m in enumerate(members) if mask >> i & 1]
        out.append((IndexSet(members=tuple(sub)), 1 if len(sub) % 2 else -1))
    return out


def _prop2_terms(
    flags: BlockFlags, d: int
) -> tuple[Callable[[np.ndarray | None], float], _Terms]:
    D = IndexSet.full(d)
    k = flags.k_n
    star, star2, union = flags.star(D), flags.star2(D), flags.union(D)
    quiet = ~star

    terms: _Terms = {
        "theta2star_tau2star": (lambda idx: _count(star2, idx), 1),
        # θ*Γ* · β⁽¹⁾: N*-positive blocks that are N**-zero
        "theta1star_gamma_star_beta1": (
            lambda idx: _count(star, idx) * _ratio(~star2, star, idx),
            1,
        ),
    }
    for J, sign in _signed_subsets(D.members):
        both = flags.all_margins(J)
        terms[f"Theta_{J}"] = (
            lambda idx, both=both: k * _ratio(both, quiet, idx),
            sign,
        )
    return (lambda idx: _count(union, idx)), terms


def _prop3_terms(
    flags: BlockFlags, d: int
) -> tuple[Callable[[np.ndarray | None], float], _Terms]:
    k = flags.k_n
    D = IndexSet.full(d)
    union = flags.union(D)
    terms: _Terms = {}
    for j in range(1, d + 1):
        m = flags.margin[:, j - 1]
        terms[f"theta_j_tau_j[{j}]"] = (lambda idx, m=m: _count(m, idx), 1)
    for j in range(1, d):
        Dj = IndexSet(members=tuple(range(j, d + 1)))
        star, star2 = flags.star(Dj), flags.star2(Dj)
        quiet = ~star
        terms[f"theta2star_tau2star[{Dj}]"] = (
            lambda idx, s2=star2: _count(s2, idx),
            -1,
        )
        terms[f"theta1star_gamma_star_beta1[{Dj}]"] = (
            lambda idx, s=star, s2=star2: _count(s, idx) * _ratio(~s2, s, idx),
            -1,
        )
        for J, sign in _signed_subsets(tuple(range(j + 1, d + 1))):
            full = IndexSet(members=(j, *J.members))
            both = flags.all_margins(full)
            terms[f"beta2_{full}"] = (
                lambda idx, both=both, q=quiet: k * _ratio(both, q, idx),
                -sign,
            )
    return (lambda idx: _count(union, idx)), terms


def _check_identity(
    identity: str,
    builder: Callable[[BlockFlags, int], tuple[Callable, _Terms]],
    series: SeriesMatrix,
    tau: TauLike,
    blocks: BlockScheme,
    policy: LevelPolicy | None,
    n_boot: int,
    seed: Seed | int | None,
    threads: int | None,
) -> DecompReport:
    d = series.d
    if d > MAX_SUBSET_DIM:
        raise ValueError(f"Identity checks support d <= {MAX_SUBSET_DIM}, got {d}")
    tau = as_tau(tau)
    flags = BlockFlags(series, tau, blocks, policy)
    lhs_fn, term_fns = builder(flags, d)
    names = list(term_fns)

    lhs = lhs_fn(None)
    values = {name: fn(None) for name, (fn, _) in term_fns.items()}
    signs = {name: sign for name, (_, sign) in term_fns.items()}
    undefined = tuple(n for n, v in values.items() if not math.isfinite(v))
    reconstructed = math.fsum(
        signs[n] * v for n, v in values.items() if n not in undefined
    )
    residual = lhs - reconstructed

    def _stat(idx: np.ndarray) -> np.ndarray:
        return np.array([lhs_fn(idx)] + [term_fns[n][0](idx) for n in names])

    mc_se: float | None = None
    term_se: dict[str, float | None] = {}
    if n_boot > 1:
        sd = nan_std(block_bootstrap(blocks.k_n, _stat, n_boot, seed, threads))
        term_se = {
            n: (float(s) if math.isfinite(s) else None) for n, s in zip(names, sd[1:])
        }
        var = [float(sd[0]) ** 2] + [
            s**2 for n, s in term_se.items() if s is not None and n not in undefined
        ]
        mc_se = math.sqrt(math.fsum(var)) if all(map(math.isfinite, var)) else None

    if undefined:
        logger.warning(
            "%s check at tau=%s is partial; undefined terms: %s",
            identity,
            tau.values,
            ", ".join(undefined),
        )
    logger.debug("%s residual %.6g (pooled SE %s)", identity, residual, mc_se)
    return DecompReport(
        identity=identity,  # type: ignore[arg-type]
        tau=tau,
        n=series.n,
        k_n=blocks.k_n,
        lhs=lhs,
        terms={n: (None if n in undefined else v) for n, v in values.items()},
        signs=signs,
        term_se=term_se,
        reconstructed=reconstructed,
        residual=residual,
        mc_se=mc_se,
        partial=bool(undefined),
        undefined_terms=undefined,
    )


def check_prop2_identity(
    series: SeriesMatrix,
    tau: TauLike,
    blocks: BlockScheme,
    *,
    policy: LevelPolicy | None = None,
    n_boot: int = DEFAULT_BOOTSTRAP,
    seed: Seed | int | None = None,
    threads: int | None = None,
) -> DecompReport:
    """Residual of θ̂Γ̂ against its reconstruction over all J ⊆ D.

        θ̂**τ̂** + θ̂*Γ̂*β̂⁽¹⁾ + Σ_J (−1)^{|J|+1} Θ̂_J

    The pooled standard error combines the block-bootstrap variances of the left
    side and of every term.
    """
    return _check_identity(
        "prop2", _prop2_terms, series, tau, blocks, policy, n_boot, seed, threads
    )


def check_prop3_identity(
    series: SeriesMatrix,
    tau: TauLike,
    blocks: BlockScheme,
    *,
    policy: LevelPolicy | None = None,
    n_boot: int = DEFAULT_BOOTSTRAP,
    seed: Seed | int | None = None,
    threads: int | None = None,
) -> DecompReport:
    """Residual of θ̂Γ̂ against the chain reconstruction over D_j = {j..d}.

    Σ_j θ̂_jτ_j minus, for j < d, θ̂**τ̂**_{D_j}, θ̂*Γ̂*β̂⁽¹⁾_{D_j}
    and the inclusion–exclusion sum of β̂⁽²⁾_{{j}∪J}, where
    β̂⁽²⁾_{{j}∪J} = k_n·P̂(all of {j}∪J positive | N*_{D_j} = 0).
    """
    return _check_identity(
        "prop3a", _prop3_terms, series, tau, blocks, policy, n_boot, seed, threads
    )
