from __future__ import annotations

import math
from typing import Annotated, Any, Literal

import numpy as np
from annotated_types import Ge, Gt, Lt
from pydantic import Field, model_validator

from ._base import FrozenModel

MARGIN_SUM_TOL = 1e-12


class Signature(FrozenModel):
    """One coefficient a_{l,k,j} of an M4 process.

    Signature id `l` and margin `j` are 1-based; `k` is the lag.
    Accepts a plain ``(l, k, j, a)`` tuple.

    >>> Signature.model_validate((1, 0, 2, 0.5))
    Signature(l=1, k=0, j=2, a=0.5)
    """

    l: Annotated[int, Ge(1)]  # noqa: E741
    k: Annotated[int, Ge(0)]
    j: Annotated[int, Ge(1)]
    a: Annotated[float, Ge(0)]

    @model_validator(mode="before")
    @classmethod
    def _coerce(cls, value: Any) -> Any:
        if isinstance(value, list | tuple) and len(value) == 4:
            return dict(zip(("l", "k", "j", "a"), value))
        return value

    @model_validator(mode="after")
    def _check(self) -> Signature:
        if not math.isfinite(self.a):
            raise ValueError(f"Non-finite coefficient a{self.key}={self.a!r}")
        return self

    @property
    def key(self) -> tuple[int, int, int]:
        return (self.l, self.k, self.j)


class M4Spec(FrozenModel):
    """Maxima of moving maxima process X_{n,j} = max_{l,k} a_{l,k,j} Z_{l,n-k}.

    `margin_sums` s_j = Σ_{l,k} a_{l,k,j} are filled in by
    `extremix.core.validate_m4_spec`; when given they must match.
    """

    d: Annotated[int, Ge(1)]
    signatures: tuple[Signature, ...] = Field(min_length=1)
    margin_sums: tuple[float, ...] = ()
    unit_frechet_margins: bool = Field(
        default=False,
        description="Assert that every margin sums to one (unit Fréchet margins).",
    )

    @model_validator(mode="after")
    def _check(self) -> M4Spec:
        seen: set[tuple[int, int, int]] = set()
        for sig in self.signatures:
            if sig.j > self.d:
                raise ValueError(f"Invalid margin j={sig.j} in signature; d={self.d}")
            if sig.key in seen:
                raise ValueError(f"Duplicate coefficient for (l, k, j)={sig.key}")
            seen.add(sig.key)
        sums = self.computed_sums()
        for j, s in enumerate(sums, start=1):
            if s <= 0:
                raise ValueError(f"Empty margin {j}: no positive coefficient")
        if self.margin_sums:
            if len(self.margin_sums) != self.d or any(
                not math.isclose(a, b, rel_tol=MARGIN_SUM_TOL, abs_tol=MARGIN_SUM_TOL)
                for a, b in zip(self.margin_sums, sums)
            ):
                raise ValueError(
                    f"margin_sums {self.margin_sums!r} do not match "
                    f"coefficients {sums!r}"
                )
        if self.unit_frechet_margins:
            for j, s in enumerate(sums, start=1):
                if abs(s - 1) > MARGIN_SUM_TOL:
                    raise ValueError(
                        f"unit_frechet_margins is set but margin {j} sums to {s!r}"
                    )
        return self

    def computed_sums(self) -> tuple[float, ...]:
        sums: list[list[float]] = [[] for _ in range(self.d)]
        for sig in self.signatures:
            sums[sig.j - 1].append(sig.a)
        return tuple(math.fsum(s) for s in sums)

    @property
    def scales(self) -> tuple[float, ...]:
        """Fréchet scales of the margins."""
        return self.margin_sums or self.computed_sums()

    @property
    def signature_ids(self) -> tuple[int, ...]:
        return tuple(sorted({s.l for s in self.signatures}))

    @property
    def max_lag(self) -> int:
        """K, the largest lag carrying a coefficient."""
        return max(s.k for s in self.signatures)

    def coefficients(self) -> np.ndarray:
        """Dense array a[l, k, j] of shape (L, K + 1, d), zero where absent."""
        ids = {lid: i for i, lid in enumerate(self.signature_ids)}
        out = np.zeros((len(ids), self.max_lag + 1, self.d))
        for s in self.signatures:
            out[ids[s.l], s.k, s.j - 1] = s.a
        return out

    def scaled_coefficients(self) -> np.ndarray:
        """Dense array b = a[l, k, j] / s_j."""
        return self.coefficients() / np.asarray(self.scales)

    @classmethod
    def from_array(cls, a: Any, **kwargs: Any) -> M4Spec:
        """Build a spec from a dense (L, K + 1, d) coefficient array."""
        arr = np.asarray(a, dtype=float)
        if arr.ndim != 3:
            raise ValueError(f"Expected a (L, K + 1, d) array, got shape {arr.shape}")
        sigs = [
            Signature(l=int(l) + 1, k=int(k), j=int(j) + 1, a=float(arr[l, k, j]))
            for l, k, j in zip(*np.nonzero(arr))  # noqa: E741
        ]
        return cls(d=arr.shape[2], signatures=tuple(sigs), **kwargs)


class GaussFrechetSpec(FrozenModel):
    """Bivariate Gaussian copula with unit-Fréchet margins, i.i.d. over time.

    >>> GaussFrechetSpec(rho=0.5).eta
    0.75
    """

    rho: Annotated[float, Gt(-1), Lt(1)]
    d: Literal[2] = 2

    @property
    def eta(self) -> float:
        """Tail index η = (1 + ρ)/2 of min(X_1, X_2)."""
        return (1 + self.rho) / 2
