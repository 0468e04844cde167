"""Shared domain types: rates, index sets, levels, block schemes and series."""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from contextlib import suppress
from numbers import Integral
from typing import Annotated, Any, Literal

import numpy as np
from annotated_types import Ge
from pydantic import Field, computed_field, model_validator

from ._array import Matrix2D
from ._base import FrozenModel

logger = logging.getLogger(__name__)

LevelPolicy = Literal["analytic_frechet", "empirical_quantile"]
"""How thresholds u_j are derived from a rate vector τ."""
CountKind = Literal["union", "star", "star2"]
"""The three exceedance processes: some margin, all margins, all above common."""
MarginTag = Literal["unit_frechet", "frechet", "empirical", "unknown"]
"""What is known about the marginal distributions of a series."""

PositiveInt = Annotated[int, Ge(1)]


def _coerce_sequence(field: str, value: Any) -> Any:
    if isinstance(value, dict):
        return value
    if isinstance(value, np.ndarray):
        value = value.tolist()
    if isinstance(value, Sequence) and not isinstance(value, str):
        return {field: tuple(value)}
    if isinstance(value, int | float):
        return {field: (value,)}
    return value


class TauVector(FrozenModel):
    """Argument τ ∈ (0, ∞)^d of the multivariate extremal index.

    Examples
    --------
    >>> TauVector.model_validate((2, 1)).values
    (2.0, 1.0)
    >>> TauVector.model_validate((2, 1)).scaled(0.5).values
    (1.0, 0.5)
    """

    values: tuple[float, ...] = Field(min_length=1, description="Rates τ_1..τ_d.")

    @model_validator(mode="before")
    @classmethod
    def _coerce(cls, value: Any) -> Any:
        return _coerce_sequence("values", value)

    @model_validator(mode="after")
    def _check(self) -> TauVector:
        for i, t in enumerate(self.values):
            if not (math.isfinite(t) and t > 0):
                raise ValueError(f"Invalid tau[{i}] {t!r}: must be positive and finite")
        return self

    @property
    def d(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def scaled(self, c: float) -> TauVector:
        """Return c·τ."""
        return TauVector(values=tuple(c * t for t in self.values))

    def subset(self, J: IndexSet) -> TauVector:
        """Return τ_J."""
        return TauVector(values=tuple(self.values[i] for i in J.indices))

    def min_over(self, J: IndexSet) -> float:
        """Return ⋀_{j∈J} τ_j."""
        return min(self.values[i] for i in J.indices)


class IndexSet(FrozenModel):
    """A nonempty subset J of {1, ..., d}. Members are 1-based and kept sorted.

    Examples
    --------
    >>> IndexSet.model_validate([2, 1]).members
    (1, 2)
    >>> IndexSet.full(3).indices
    (0, 1, 2)
    """

    members: tuple[PositiveInt, ...] = Field(min_length=1)

    @model_validator(mode="before")
    @classmethod
    def _coerce(cls, value: Any) -> Any:
        if isinstance(value, set | frozenset):
            value = sorted(value)
        data = _coerce_sequence("members", value)
        if isinstance(data, dict) and isinstance(data.get("members"), Sequence):
            with suppress(TypeError):
                data = {**data, "members": tuple(sorted(data["members"]))}
        return data

    @model_validator(mode="after")
    def _check(self) -> IndexSet:
        if len(set(self.members)) != len(self.members):
            raise ValueError(f"Invalid index set {self.members!r}: duplicate members")
        return self

    @classmethod
    def full(cls, d: int) -> IndexSet:
        return cls(members=tuple(range(1, d + 1)))

    @classmethod
    def from_mask(cls, mask: int) -> IndexSet:
        """Build the set whose bit i (0-based) marks member i + 1."""
        bits = range(mask.bit_length())
        return cls(members=tuple(i + 1 for i in bits if mask >> i & 1))

    @property
    def indices(self) -> tuple[int, ...]:
        """Zero-based column indices."""
        return tuple(m - 1 for m in self.members)

    @property
    def mask(self) -> int:
        return sum(1 << i for i in self.indices)

    def __len__(self) -> int:
        return len(self.members)

    def __str__(self) -> str:
        return "{" + ",".join(map(str, self.members)) + "}"

    def check_within(self, d: int) -> IndexSet:
        if self.members[-1] > d:
            raise ValueError(f"Invalid index set {self}: members must lie in 1..{d}")
        return self


class LevelVector(FrozenModel):
    """Thresholds u_j derived from τ under a level policy.

    `n` and `scales` let the same policy be re-applied at another τ; analytic
    levels are u_j = n·scale_j/τ_j.
    """

    u: tuple[float, ...]
    tau: TauVector
    policy: LevelPolicy
    n: PositiveInt
    scales: tuple[float, ...] | None = None

    @model_validator(mode="after")
    def _check(self) -> LevelVector:
        if len(self.u) != self.tau.d:
            raise ValueError(
                f"Invalid levels: {len(self.u)} thresholds for a {self.tau.d}-dim tau"
            )
        if self.scales is not None and len(self.scales) != self.tau.d:
            raise ValueError(f"Invalid scales {self.scales!r} for d={self.tau.d}")
        if self.policy == "analytic_frechet":
            scales = self.scales or (1.0,) * self.tau.d
            for j, (u, s, t) in enumerate(zip(self.u, scales, self.tau.values)):
                if u != self.n * s / t:
                    raise ValueError(
                        f"Invalid analytic level u[{j}]={u!r}: expected n·s/τ = "
                        f"{self.n * s / t!r}"
                    )
        elif any(t >= self.n for t in self.tau.values):
            raise ValueError(
                f"Empirical levels need every tau < n={self.n}, got {self.tau.values!r}"
            )
        return self

    @property
    def d(self) -> int:
        return len(self.u)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.u, dtype=float)


class BlockScheme(FrozenModel):
    """Partition of {1..n} into k_n blocks of length r_n = floor(n/k_n).

    Indices after k_n·r_n are discarded.

    Examples
    --------
    >>> b = BlockScheme(n=10, k_n=3)
    >>> b.r_n, b.used
    (3, 9)
    >>> b.bounds(3)
    (7, 9)
    """

    n: PositiveInt
    k_n: PositiveInt
    r_n: int = 0

    @model_validator(mode="before")
    @classmethod
    def _fill_r_n(cls, data: Any) -> Any:
        if isinstance(data, dict) and not data.get("r_n"):
            n, k = data.get("n"), data.get("k_n")
            if isinstance(n, Integral) and isinstance(k, Integral) and k > 0:
                data = {**data, "r_n": int(n) // int(k)}
        return data

    @model_validator(mode="after")
    def _check(self) -> BlockScheme:
        if not 1 <= self.k_n <= self.n:
            raise ValueError(f"Invalid k_n {self.k_n!r}: must lie in 1..n={self.n}")
        if self.r_n != self.n // self.k_n:
            raise ValueError(f"Invalid r_n {self.r_n!r}: must be floor(n/k_n)")
        return self

    @property
    def used(self) -> int:
        """Number of indices covered by blocks."""
        return self.k_n * self.r_n

    def bounds(self, b: int) -> tuple[int, int]:
        """1-based inclusive index range of block b (1-based)."""
        if not 1 <= b <= self.k_n:
            raise ValueError(f"Invalid block {b!r}: must lie in 1..{self.k_n}")
        return ((b - 1) * self.r_n + 1, b * self.r_n)

    def reshape(self, rows: np.ndarray) -> np.ndarray:
        """View per-index values of shape (n, ...) as (k_n, r_n, ...)."""
        if rows.shape[0] < self.used:
            raise ValueError(
                f"Expected at least {self.used} rows for this scheme, "
                f"got {rows.shape[0]}"
            )
        return rows[: self.used].reshape(self.k_n, self.r_n, *rows.shape[1:])

    def block_ids(self) -> np.ndarray:
        """Block number (0-based) of every covered index."""
        return np.repeat(np.arange(self.k_n), self.r_n)


class SeriesMatrix(FrozenModel):
    """An n×d sample from a stationary multivariate sequence."""

    data: Matrix2D
    margin_tag: MarginTag = "unknown"
    scales: tuple[float, ...] | None = Field(
        default=None,
        description="Fréchet scales when margin_tag is 'frechet' (None means unit).",
    )

    @model_validator(mode="after")
    def _check(self) -> SeriesMatrix:
        data = self.data
        if data.shape[0] < 1 or data.shape[1] < 1:
            raise ValueError(f"Invalid series shape {data.shape}: need n, d >= 1")
        if not np.isfinite(data).all():
            bad = np.argwhere(~np.isfinite(data))[0]
            raise ValueError(
                f"Non-finite value at row {bad[0] + 1}, column {bad[1] + 1}"
            )
        if self.margin_tag in ("unit_frechet", "frechet") and (data <= 0).any():
            raise ValueError(f"{self.margin_tag!r} series must be strictly positive")
        if self.scales is not None:
            if len(self.scales) != data.shape[1]:
                raise ValueError(
                    f"Invalid scales {self.scales!r} for d={data.shape[1]}"
                )
            if self.margin_tag == "unit_frechet" and any(s != 1 for s in self.scales):
                raise ValueError("unit_frechet series cannot carry non-unit scales")
        return self

    @computed_field  # type: ignore[prop-decorator]
    @property
    def n(self) -> int:
        return int(self.data.shape[0])

    @computed_field  # type: ignore[prop-decorator]
    @property
    def d(self) -> int:
        return int(self.data.shape[1])

    @property
    def frechet_scales(self) -> tuple[float, ...]:
        """Known Fréchet scales (all 1 unless tagged 'frechet' with scales)."""
        return self.scales or (1.0,) * self.d

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SeriesMatrix):
            return NotImplemented
        return (
            self.margin_tag == other.margin_tag
            and self.scales == other.scales
            and np.array_equal(self.data, other.data)
        )

    __hash__ = None  # type: ignore[assignment]
