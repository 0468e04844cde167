import math

import numpy as np
import pytest

import extremix as xm
from extremix import theory
from extremix.cli._suite import SHIFTED_LAGS
from extremix.estimate import (
    estimate_gamma,
    estimate_mei,
    estimate_theta,
    estimate_theta_star2_invariance,
    nan_std,
)

BIG_TAU = (1000, 1000)
BIG_K = 10_000


def test_hand_estimates(small_series: xm.SeriesMatrix) -> None:
    union = estimate_theta(small_series, (1, 1), k_n=2, se_method="binomial")
    assert union.gamma == 4
    assert union.nonzero_blocks == 2
    assert union.theta == 0.5
    # every block is nonzero, so the binomial SE vanishes
    assert union.se == 0.0
    assert union.gamma_se is None

    star = estimate_theta(small_series, (1, 1), kind="star", k_n=2, n_boot=0)
    assert (star.theta, star.gamma, star.se) == (1.0, 1.0, None)

    mei = estimate_mei(small_series, (1, 1), k_n=2, n_boot=0)
    assert mei.theta_hat == 0.5
    assert mei.theta_star_hat == 1.0
    assert mei.theta_star2_hat == 1.0
    assert (mei.gamma_hat, mei.gamma_star_hat, mei.tau_star2_hat) == (4, 1, 1)
    assert mei.marginal_thetas == pytest.approx((2 / 3, 1 / 2))
    assert mei.undefined == ()


def test_gamma_example() -> None:
    rows = np.array([[3.0, 1], [1, 3], [3, 3]])
    s = xm.SeriesMatrix(data=rows, margin_tag="unit_frechet")
    assert estimate_gamma(s, (1.5, 1.5), kind="star") == 1.0
    assert estimate_gamma(s, (1.5, 1.5), J=[2]) == 2.0


def test_iid_theta_is_one(iid_series: xm.SeriesMatrix) -> None:
    est = estimate_theta(iid_series, (10, 10), k_n=2000, n_boot=50, seed=2)
    assert est.theta == pytest.approx(1.0, abs=0.05)
    gamma = estimate_gamma(iid_series, (100, 100))
    # independent margins: Γ(τ) = τ1 + τ2
    assert gamma == pytest.approx(200, abs=45)


def test_undefined_estimate() -> None:
    s = xm.SeriesMatrix(data=np.ones((100, 2)), margin_tag="unit_frechet")
    with pytest.raises(xm.UndefinedEstimateError, match="no union events"):
        estimate_theta(s, (1, 1))
    mei = estimate_mei(s, (1, 1), n_boot=0)
    assert mei.theta_hat is None
    assert set(mei.undefined) == {"theta_hat", "theta_star_hat", "theta_star2_hat"}
    assert mei.gamma_hat == 0
    assert mei.chain_ok is None


def test_invalid_se_method(small_series: xm.SeriesMatrix) -> None:
    with pytest.raises(ValueError, match="se_method"):
        estimate_theta(
            small_series, (1, 1), se_method="jackknife"  # type: ignore[arg-type]
        )


def test_shifted_lags_estimates(large_shifted: xm.SeriesMatrix) -> None:
    spec = SHIFTED_LAGS
    est = estimate_theta(large_shifted, BIG_TAU, k_n=BIG_K, n_boot=50, seed=1)
    # θ(τ)Γ(τ) is homogeneous of order one
    assert est.theta_gamma == pytest.approx(0.7 * BIG_TAU[0], rel=0.1)
    assert est.theta == pytest.approx(theory.m4_theta(spec, BIG_TAU), abs=0.06)
    assert est.se is not None and 0 < est.se < 0.05

    margin_2 = estimate_theta(large_shifted, BIG_TAU, [2], k_n=BIG_K, n_boot=0)
    assert margin_2.theta == pytest.approx(7 / 13, abs=0.06)

    star2 = estimate_gamma(large_shifted, BIG_TAU, kind="star2")
    expected = theory.m4_gamma(spec, BIG_TAU, None, "star2")
    assert star2 == pytest.approx(expected, abs=4 * math.sqrt(expected))


def test_bootstrap_does_not_depend_on_threads(
    shifted_series: xm.SeriesMatrix,
) -> None:
    a = estimate_theta(shifted_series, (40, 40), n_boot=40, seed=3, threads=1)
    b = estimate_theta(shifted_series, (40, 40), n_boot=40, seed=3, threads=4)
    c = estimate_theta(shifted_series, (40, 40), n_boot=40, seed=4)
    assert a == b
    assert a.se != c.se


def test_rate_standard_errors(shifted_series: xm.SeriesMatrix) -> None:
    tau = (200, 200)
    mei = estimate_mei(shifted_series, tau, n_boot=40, seed=5)
    assert set(mei.standard_errors) == {
        "theta_hat",
        "theta_star_hat",
        "theta_star2_hat",
        "gamma_hat",
        "gamma_star_hat",
        "tau_star2_hat",
    }
    union = estimate_theta(shifted_series, tau, n_boot=40, seed=5)
    assert mei.standard_errors["theta_hat"] == union.se
    assert mei.standard_errors["gamma_hat"] == union.gamma_se
    assert union.gamma_se is not None and union.gamma_se > 0
    for key in ("gamma_star_hat", "tau_star2_hat"):
        se = mei.standard_errors[key]
        assert se is not None and se > 0


def test_nan_std() -> None:
    draws = np.array([[1.0, np.nan, 2.0], [3.0, 5.0, np.inf], [5.0, np.nan, 4.0]])
    out = nan_std(draws)
    assert out[0] == pytest.approx(2.0)
    # one defined draw: undefined, without a degrees-of-freedom warning
    assert np.isnan(out[1])
    assert out[2] == pytest.approx(np.std([2.0, 4.0], ddof=1))
    assert np.isnan(nan_std(np.array([1.0])))
    assert float(nan_std(np.array([1.0, 3.0]))) == pytest.approx(np.sqrt(2))


def test_invariance_table(large_shifted: xm.SeriesMatrix) -> None:
    grid = [(1000, 1000), (2000, 1000), (1000, 3000)]
    table = estimate_theta_star2_invariance(
        large_shifted, grid, k_n=BIG_K, n_boot=30, seed=5
    )
    assert [r.tau.values for r in table.rows] == [
        (1000.0, 1000.0),
        (2000.0, 1000.0),
        (1000.0, 3000.0),
    ]
    # θ** of the pair is 1 for every τ
    for row in table.rows:
        assert row.theta_star2 == pytest.approx(1.0, abs=0.05)
    assert table.max_discrepancy <= 0.05

    with pytest.raises(ValueError, match="at least 3"):
        estimate_theta_star2_invariance(large_shifted, grid[:2])


def test_single_margin_invariance_is_marginal(
    shifted_series: xm.SeriesMatrix,
) -> None:
    grid = [(20, 20), (40, 20), (20, 60)]
    table = estimate_theta_star2_invariance(shifted_series, grid, [1], n_boot=0)
    for row, tau in zip(table.rows, grid):
        marginal = estimate_theta(shifted_series, tau, [1], n_boot=0)
        assert row.theta_star2 == marginal.theta
