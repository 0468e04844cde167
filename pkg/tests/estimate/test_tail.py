import logging

import numpy as np
import pytest
from scipy import stats

import extremix as xm
from extremix.estimate import (
    empirical_copula_diag,
    estimate_chi,
    estimate_chibar,
    estimate_eta,
    estimate_madogram,
    extremal_coeff_from_madogram,
    tail_report,
)


@pytest.fixture
def comonotone() -> xm.SeriesMatrix:
    z = xm.simulate_iid_frechet(10_000, 1, seed=1).data[:, 0]
    return xm.SeriesMatrix(data=np.c_[z, np.log(z)])


@pytest.fixture
def gauss() -> xm.SeriesMatrix:
    return xm.simulate_gauss_frechet(xm.GaussFrechetSpec(rho=0.5), 200_000, seed=6)


def test_comonotone(comonotone: xm.SeriesMatrix) -> None:
    n = comonotone.n
    for u in (0.5, 0.9, 0.99):
        c = empirical_copula_diag(comonotone, (1, 2), u)
        assert abs(c - u) <= 1 / (n + 1)
    chi = estimate_chi(comonotone, (1, 2))
    assert chi.point == pytest.approx(1.0, abs=0.01)
    # 50 rows lie above u = 0.995, 10 above u = 0.999
    assert chi.point_u == 0.995
    chibar = estimate_chibar(comonotone, (1, 2))
    assert chibar.point == pytest.approx(1.0, abs=0.05)
    assert estimate_madogram(comonotone, (1, 2)) == 0.0


def test_independent(iid_series: xm.SeriesMatrix) -> None:
    c = empirical_copula_diag(iid_series, (1, 2), 0.9)
    assert c == pytest.approx(0.81, abs=0.01)
    chi = estimate_chi(iid_series, (1, 2))
    assert chi.point == pytest.approx(0.0, abs=0.15)
    assert all(j >= 50 for j in chi.joint_exceedances[: chi.u.index(chi.point_u) + 1])
    chibar = estimate_chibar(iid_series, (1, 2))
    assert chibar.point == pytest.approx(0.0, abs=0.2)
    nu = estimate_madogram(iid_series, (1, 2))
    assert nu == pytest.approx(1 / 6, abs=0.01)
    assert extremal_coeff_from_madogram(nu) == pytest.approx(2.0, abs=0.1)
    assert estimate_eta(iid_series, (1, 2)) == pytest.approx(0.5, abs=0.1)


def test_gaussian_tail(gauss: xm.SeriesMatrix) -> None:
    rep = tail_report(gauss, (1, 2), (0.9, 0.95, 0.99), extrapolate=True)
    assert rep.eta == pytest.approx(0.75, abs=0.1)
    assert rep.eta_k == int(200_000**0.6)
    # asymptotically independent, so χ̂ falls towards 0 as u grows
    assert rep.chi.values[-1] < rep.chi.values[0]
    assert rep.chi.extrapolated is not None
    assert rep.chibar.point == pytest.approx(0.5, abs=0.15)


def test_extrapolated_chi(comonotone: xm.SeriesMatrix) -> None:
    chi = estimate_chi(comonotone, (1, 2), (0.9, 0.95, 0.99), extrapolate=True)
    assert chi.extrapolated == pytest.approx(1.0, abs=0.01)
    single = estimate_chi(comonotone, (1, 2), (0.9,), extrapolate=True)
    assert single.extrapolated is None


def test_dropped_grid_values(caplog: pytest.LogCaptureFixture) -> None:
    x = np.arange(1.0, 6.0)
    s = xm.SeriesMatrix(data=np.c_[x, x])
    # pseudo-observations are 1/6 .. 5/6, so Ĉ(0.1, 0.1) = 0
    with caplog.at_level(logging.WARNING, logger="extremix.estimate._tail"):
        chi = estimate_chi(s, (1, 2), (0.1, 0.5))
    assert chi.dropped == (0.1,)
    assert chi.u == (0.5,)
    assert chi.point_u == 0.5
    assert "No grid value has 50 joint exceedances" in caplog.text


def test_invalid_inputs(iid_series: xm.SeriesMatrix) -> None:
    with pytest.raises(ValueError, match="increasing"):
        estimate_chi(iid_series, (1, 2), (0.9, 0.5))
    with pytest.raises(ValueError, match="inside"):
        estimate_chibar(iid_series, (1, 2), (0.5, 1.0))
    with pytest.raises(ValueError, match="pair"):
        estimate_madogram(iid_series, (1, 1))
    with pytest.raises(ValueError, match="pair"):
        estimate_chi(iid_series, (1, 3))
    with pytest.raises(ValueError, match="Invalid u"):
        empirical_copula_diag(iid_series, (1, 2), 1.0)
    with pytest.raises(ValueError, match="madogram"):
        extremal_coeff_from_madogram(0.5)
    with pytest.raises(ValueError, match="k >= 10"):
        estimate_eta(iid_series, (1, 2), 5)
    with pytest.raises(ValueError, match="n >= 2"):
        estimate_madogram(xm.SeriesMatrix(data=[[1.0, 2.0]]), (1, 2))


def test_short_sample_skips_eta() -> None:
    s = xm.simulate_iid_frechet(30, 2, seed=3)
    rep = tail_report(s, (1, 2), (0.5, 0.7))
    assert rep.eta is None
    assert rep.eta_k is None
    assert rep.n == 30


def test_rank_invariance() -> None:
    spec = xm.GaussFrechetSpec(rho=0.5)
    series = xm.simulate_gauss_frechet(spec, 20_000, seed=9)
    x = series.data
    # a different strictly increasing map per column
    warped_data = np.c_[np.exp(-1 / x[:, 0]), (2.5 * x[:, 1] - 7) ** 3]
    warped = xm.SeriesMatrix(data=warped_data)
    np.testing.assert_array_equal(
        stats.rankdata(warped_data, axis=0), stats.rankdata(x, axis=0)
    )
    grid = (0.9, 0.95, 0.99)
    chi = estimate_chi(warped, (1, 2), grid)
    assert chi.values == estimate_chi(series, (1, 2), grid).values
    chibar = estimate_chibar(warped, (1, 2), grid)
    assert chibar.values == estimate_chibar(series, (1, 2), grid).values
    assert estimate_madogram(warped, (1, 2)) == estimate_madogram(series, (1, 2))
    assert estimate_eta(warped, (1, 2)) == estimate_eta(series, (1, 2))
    assert tail_report(warped, (1, 2), grid) == tail_report(series, (1, 2), grid)
