from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np
import pytest

import extremix as xm
from extremix.cli._suite import SHIFTED_LAGS, SINGLE_FACTOR, TWO_FACTOR

if TYPE_CHECKING:
    from collections.abc import Iterator


@pytest.fixture
def shifted_lags() -> xm.M4Spec:
    """One factor, X1 at lags 0, 2 and X2 at lags 1, 2, 3; X2 has scale 1.3."""
    return SHIFTED_LAGS


@pytest.fixture
def single_factor() -> xm.M4Spec:
    return SINGLE_FACTOR


@pytest.fixture
def two_factor() -> xm.M4Spec:
    return TWO_FACTOR


@pytest.fixture
def independent_spec() -> xm.M4Spec:
    """Each margin driven by its own factor at lag 0: i.i.d. independent margins."""
    return xm.M4Spec(d=2, signatures=[(1, 0, 1, 1.0), (2, 0, 2, 1.0)])


@pytest.fixture
def iid_series() -> xm.SeriesMatrix:
    return xm.simulate_iid_frechet(20_000, 2, seed=11)


@pytest.fixture
def shifted_series(shifted_lags: xm.M4Spec) -> xm.SeriesMatrix:
    return xm.simulate_m4(shifted_lags, 40_000, seed=3)


@pytest.fixture
def single_series(single_factor: xm.M4Spec) -> xm.SeriesMatrix:
    return xm.simulate_m4(single_factor, 40_000, seed=5)


@pytest.fixture
def small_series() -> xm.SeriesMatrix:
    """A hand-made unit-Fréchet series with known exceedances at τ = (1, 1), n = 8.

    Levels are u = (8, 8); exceedances (x) by row:

        row  1  2  3  4  5  6  7  8
        X1   x  .  x  .  .  .  .  x
        X2   x  x  .  .  .  .  .  .
    """
    data = np.array(
        [
            [9.0, 10.0],
            [1.0, 9.0],
            [12.0, 2.0],
            [1.0, 1.0],
            [2.0, 3.0],
            [1.5, 1.5],
            [3.0, 2.0],
            [20.0, 1.0],
        ]
    )
    return xm.SeriesMatrix(data=data, margin_tag="unit_frechet")


@pytest.fixture
def random_specs() -> Iterator[xm.M4Spec]:
    """50 seeded random M4 specs with d <= 4."""

    def _gen() -> Iterator[xm.M4Spec]:
        rng = np.random.default_rng(2024)
        for _ in range(50):
            d = int(rng.integers(2, 5))
            L = int(rng.integers(1, 4))
            K = int(rng.integers(0, 4))
            a = rng.uniform(0, 1, (L, K + 1, d))
            a[rng.uniform(size=a.shape) < 0.3] = 0.0
            # every margin needs a positive coefficient
            a[0, 0, :] = np.maximum(a[0, 0, :], 0.05)
            yield xm.M4Spec.from_array(a)

    return _gen()


@pytest.fixture(scope="session")
def large_shifted() -> xm.SeriesMatrix:
    """10^6 steps of `SHIFTED_LAGS`, for estimates at τ = (1000, 1000)."""
    return xm.simulate_m4(SHIFTED_LAGS, 1_000_000, seed=8)
