"""Structured outputs of the estimators, closed forms, bounds and checks."""

from __future__ import annotations

from typing import Annotated, Any, Literal

import numpy as np
from annotated_types import Ge, Le
from pydantic import Field, model_validator

from ._array import CountVector
from ._base import FrozenModel
from ._core import CountKind, IndexSet, TauVector

Source = Literal["closed_form", "estimated"]


class BlockCounts(FrozenModel):
    """Per-block event counts of one exceedance process."""

    kind: CountKind
    J: IndexSet
    per_block: CountVector
    total: int = -1

    @model_validator(mode="before")
    @classmethod
    def _fill_total(cls, data: Any) -> Any:
        if (
            isinstance(data, dict)
            and "per_block" in data
            and data.get("total", -1) == -1
        ):
            data = {**data, "total": int(np.asarray(data["per_block"]).sum())}
        return data

    @model_validator(mode="after")
    def _check(self) -> BlockCounts:
        if self.total != int(self.per_block.sum()):
            raise ValueError(
                f"total {self.total} does not equal the block sum "
                f"{self.per_block.sum()}"
            )
        return self

    @property
    def k_n(self) -> int:
        return len(self.per_block)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BlockCounts):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.J == other.J
            and np.array_equal(self.per_block, other.per_block)
        )

    __hash__ = None  # type: ignore[assignment]


class ThetaEstimate(FrozenModel):
    """Block estimate of one extremal index θ_J(τ) of a given kind."""

    kind: CountKind
    J: IndexSet
    tau: TauVector
    theta: float
    gamma: float = Field(description="Γ̂ of the matching kind (τ̂** for star2).")
    nonzero_blocks: int
    k_n: int
    n: int
    se: float | None = None
    gamma_se: float | None = Field(
        default=None, description="Bootstrap SE of the rate; None for binomial SEs."
    )
    se_method: Literal["bootstrap", "binomial"] = "bootstrap"
    clamped: bool = False

    @property
    def theta_gamma(self) -> float:
        return self.theta * self.gamma


class MeiReport(FrozenModel):
    """All three extremal indices and rates at one τ, with the soft chain check.

    Kinds whose rate estimate is zero are left as None and listed in `undefined`.
    """

    tau: TauVector
    J: IndexSet
    n: int
    k_n: int
    theta_hat: float | None = None
    theta_star_hat: float | None = None
    theta_star2_hat: float | None = None
    gamma_hat: float
    gamma_star_hat: float
    tau_star2_hat: float
    marginal_thetas: tuple[float | None, ...] = ()
    standard_errors: dict[str, float | None] = Field(default_factory=dict)
    clamped: tuple[str, ...] = ()
    undefined: tuple[str, ...] = ()
    chain_ok: bool | None = Field(
        default=None,
        description=(
            "θ**τ** ≤ θ*Γ* ≤ ⋁θ_jτ_j ≤ θΓ up to 3 standard errors; "
            "None if any term is undefined."
        ),
    )


class InvarianceRow(FrozenModel):
    tau: TauVector
    theta_star2: float | None
    se: float | None = None


class InvarianceTable(FrozenModel):
    """θ̂**_J across a τ grid; θ**_J does not depend on τ."""

    J: IndexSet
    rows: tuple[InvarianceRow, ...]
    max_discrepancy: float
    pooled_se: float
    consistent: bool = Field(description="max discrepancy ≤ 3 pooled standard errors")


class TailCurve(FrozenModel):
    """χ̂(u) or χ̄̂(u) on a threshold grid plus a point estimate."""

    measure: Literal["chi", "chibar"]
    u: tuple[float, ...]
    values: tuple[float, ...]
    joint_exceedances: tuple[int, ...]
    point: float | None = None
    point_u: float | None = None
    extrapolated: float | None = None
    dropped: tuple[float, ...] = Field(
        default=(), description="Grid values where the estimate is undefined."
    )


class TailReport(FrozenModel):
    pair: tuple[int, int]
    n: int
    chi: TailCurve
    chibar: TailCurve
    madogram: Annotated[float, Ge(0), Le(0.5)]
    extremal_coeff: float
    eta: float | None = None
    eta_k: int | None = None


class MevDiag(FrozenModel):
    """Diagonal exponents ε with C(u, u) = u^ε, one per margin pair."""

    source: Literal["F_hat_H", "H"]
    pairs: tuple[tuple[int, int], ...]
    eps: tuple[float, ...]

    @model_validator(mode="after")
    def _check(self) -> MevDiag:
        if len(self.pairs) != len(self.eps):
            raise ValueError("pairs and eps must have the same length")
        for p, e in zip(self.pairs, self.eps):
            if not 1 - 1e-12 <= e <= 2 + 1e-12:
                raise ValueError(f"Exponent {e!r} for pair {p} outside [1, 2]")
        return self

    def eps_for(self, pair: tuple[int, int]) -> float:
        key = tuple(sorted(pair))
        try:
            return self.eps[self.pairs.index(key)]  # type: ignore[arg-type]
        except ValueError:
            raise KeyError(f"No exponent for pair {pair!r}") from None

    def chi_for(self, pair: tuple[int, int]) -> float:
        return 2 - self.eps_for(pair)


class BoundsReport(FrozenModel):
    """Bounds on θ(τ). Every bound here is on θ; multiply by `gamma` for θΓ."""

    source: Source
    tau: TauVector
    gamma: float
    thetas: tuple[float, ...]
    classic_lower: float
    classic_upper: float
    new_upper: float
    perm_upper: float
    perm_order: tuple[int, ...] = ()
    es_upper: float | None = Field(
        default=None, description="Ehlert–Schlather bound, only at τ = (1, ..., 1)."
    )
    theta_reference: float | None = None
    theta_reference_se: float | None = None
    perm_exceeds_classic: bool = False


class DecompReport(FrozenModel):
    """Left side θ̂Γ̂ against a signed reconstruction from decomposition terms."""

    identity: Literal["prop2", "prop3a"]
    tau: TauVector
    n: int
    k_n: int
    lhs: float
    terms: dict[str, float | None]
    signs: dict[str, int]
    term_se: dict[str, float | None] = Field(default_factory=dict)
    reconstructed: float
    residual: float
    mc_se: float | None = None
    partial: bool = False
    undefined_terms: tuple[str, ...] = ()

    @property
    def within(self) -> float | None:
        """|residual| in units of the pooled standard error."""
        if not self.mc_se:
            return None
        return abs(self.residual) / self.mc_se


class ExperimentReport(FrozenModel):
    """Single JSON document written by the command line runner."""

    command: str
    seed: int
    model: str
    n: int | None = None
    replicates: int = 1
    mei: tuple[MeiReport, ...] = ()
    invariance: tuple[InvarianceTable, ...] = ()
    bounds: tuple[BoundsReport, ...] = ()
    tail: tuple[TailReport, ...] = ()
    decomp: tuple[DecompReport, ...] = ()
    checks: dict[str, Any] = Field(default_factory=dict)
