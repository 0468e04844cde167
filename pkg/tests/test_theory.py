import itertools
import math

import numpy as np
import pytest

import extremix as xm
from extremix import theory
from extremix.core import analytic_levels

TOL = 1e-12


def _brute_neg_log_cdf(spec: xm.M4Spec, n: int, u: tuple[float, ...]) -> float:
    # every latent Z_{l,m} that reaches some (i, j) with 1 <= i <= n
    a = spec.coefficients()
    L, K1, _ = a.shape
    total = 0.0
    for li in range(L):
        for m in range(2 - K1, n + 1):
            reach = [
                a[li, k, j] / u[j]
                for k in range(K1)
                for j in range(spec.d)
                if 1 <= m + k <= n
            ]
            total += max(reach, default=0.0)
    return total


def test_shifted_lags_closed_forms(shifted_lags: xm.M4Spec) -> None:
    ones = (1.0, 1.0)
    thetas = theory.marginal_thetas(shifted_lags)
    assert thetas[0] == pytest.approx(0.7, abs=TOL)
    assert thetas[1] == pytest.approx(0.7 / 1.3, abs=TOL)
    assert theory.m4_theta_gamma(shifted_lags, ones) == pytest.approx(0.7, abs=TOL)
    assert xm.m4_gamma(shifted_lags, ones) == pytest.approx(25 / 13, abs=TOL)
    assert xm.m4_theta(shifted_lags, ones) == pytest.approx(0.7 * 13 / 25, abs=TOL)
    # only lag 2 reaches both margins
    star2 = theory.m4_theta_gamma(shifted_lags, ones, None, "star2")
    assert star2 == pytest.approx(1 / 13, abs=TOL)
    gamma_star = xm.m4_gamma(shifted_lags, ones, None, "star")
    assert gamma_star == pytest.approx(1 / 13, abs=TOL)
    assert xm.m4_theta(shifted_lags, ones, None, "star2") == pytest.approx(1.0, abs=TOL)


def test_single_factor_exponents(single_factor: xm.M4Spec) -> None:
    hat, lim = xm.mev_diag_exponents(single_factor)
    assert hat.source == "F_hat_H"
    assert lim.source == "H"
    assert hat.pairs == ((1, 2),)
    assert hat.eps_for((1, 2)) == pytest.approx(9 / 8, abs=TOL)
    assert lim.eps_for((1, 2)) == pytest.approx(1.0, abs=TOL)
    assert hat.chi_for((1, 2)) == pytest.approx(7 / 8, abs=TOL)
    assert lim.chi_for((1, 2)) == pytest.approx(1.0, abs=TOL)
    nu_hat, nu = theory.m4_madogram(single_factor, (1, 2))
    assert nu_hat == pytest.approx(1 / 34, abs=TOL)
    assert nu == pytest.approx(0.0, abs=TOL)


def test_two_factor_exponents(two_factor: xm.M4Spec) -> None:
    assert theory.marginal_thetas(two_factor) == pytest.approx((7 / 8, 7 / 8), abs=TOL)
    hat, lim = xm.mev_diag_exponents(two_factor)
    assert hat.eps_for((1, 2)) == pytest.approx(9 / 8, abs=TOL)
    assert lim.eps_for((1, 2)) == pytest.approx(8 / 7, abs=TOL)
    assert lim.chi_for((1, 2)) == pytest.approx(6 / 7, abs=TOL)
    _, nu = theory.m4_madogram(two_factor, (1, 2))
    assert nu == pytest.approx(1 / 30, abs=TOL)


def test_chi_from_theta() -> None:
    assert theory.chi_from_theta(8 / 9, 9 / 7) == pytest.approx(6 / 7, abs=TOL)
    total = theory.chi_from_theta(8 / 9, thetas=(7 / 8, 7 / 8), hat_margins="total")
    assert total == pytest.approx(2 - 64 / 63, abs=TOL)
    indep = theory.chi_from_theta(0.5, thetas=(1.0, 1.0), hat_margins="independent")
    assert indep == pytest.approx(1.0, abs=TOL)
    with pytest.raises(ValueError, match="Inconsistent"):
        theory.chi_from_theta(1.0, 3.0)
    with pytest.raises(ValueError, match="hat_margins"):
        theory.chi_from_theta(0.5)


def test_theta_is_scale_free(random_specs) -> None:
    rng = np.random.default_rng(7)
    for spec in random_specs:
        tau = rng.uniform(0.5, 2.0, spec.d)
        c = float(rng.uniform(0.01, 100.0))
        assert xm.m4_theta(spec, c * tau) == pytest.approx(
            xm.m4_theta(spec, tau), abs=TOL
        )
        star2 = xm.m4_gamma(spec, c * tau, None, "star2")
        assert star2 == pytest.approx(c * xm.m4_gamma(spec, tau, None, "star2"))


def test_theta_of_vanishing_margin(random_specs) -> None:
    rng = np.random.default_rng(8)
    for spec in random_specs:
        tau = rng.uniform(0.5, 2.0, spec.d)
        tau[0] = 1e-8
        rest = tuple(range(2, spec.d + 1))
        reduced = xm.m4_theta(spec, tau, J=rest)
        assert xm.m4_theta(spec, tau) == pytest.approx(reduced, abs=1e-6)


# two lags per factor with the same profile: θ_j(τ) = 0.6 for every τ
CONSTANT_THETA = xm.M4Spec(
    d=2,
    signatures=[
        (1, 0, 1, 0.3),
        (1, 1, 1, 0.2),
        (1, 0, 2, 0.3),
        (1, 1, 2, 0.2),
        (2, 0, 1, 0.3),
        (2, 1, 1, 0.2),
        (3, 0, 2, 0.3),
        (3, 1, 2, 0.2),
    ],
)


def test_constant_theta_keeps_hat_dependence(independent_spec: xm.M4Spec) -> None:
    for spec, chi in ((independent_spec, 0.0), (CONSTANT_THETA, 0.5)):
        assert theory.is_theta_constant(spec)
        thetas = theory.marginal_thetas(spec)
        inv = (1 / thetas[0], 1 / thetas[1])
        limit = theory.chi_from_theta(xm.m4_theta(spec, inv), xm.m4_gamma(spec, inv))
        hat, lim = xm.mev_diag_exponents(spec)
        assert limit == pytest.approx(chi, abs=TOL)
        assert hat.chi_for((1, 2)) == pytest.approx(chi, abs=TOL)
        assert lim.chi_for((1, 2)) == pytest.approx(chi, abs=TOL)
    assert theory.marginal_thetas(CONSTANT_THETA) == pytest.approx((0.6, 0.6))
    indep = theory.chi_from_theta(1.0, thetas=(1.0, 1.0), hat_margins="independent")
    assert indep == pytest.approx(0.0, abs=TOL)


def test_union_rate_matches_direct_sum(random_specs) -> None:
    for spec in itertools.islice(random_specs, 20):
        b = xm.validate_m4_spec(spec).scaled_coefficients()
        tau = np.linspace(0.5, 2.0, spec.d)
        direct = math.fsum((b * tau).max(axis=-1).ravel())
        assert xm.m4_gamma(spec, tau) == pytest.approx(direct, rel=1e-12)


def test_rate_ordering(random_specs) -> None:
    for spec in random_specs:
        tau = (1.0,) * spec.d
        tg = theory.m4_theta_gamma(spec, tau)
        star = theory.m4_theta_gamma(spec, tau, None, "star")
        star2 = theory.m4_theta_gamma(spec, tau, None, "star2")
        best_margin = max(theory.marginal_thetas(spec))
        assert star2 <= star + TOL
        assert star <= best_margin + TOL
        assert best_margin <= tg + TOL
        assert 0 < xm.m4_theta(spec, tau) <= 1 + TOL


def test_star_index_undefined_without_shared_signature(
    independent_spec: xm.M4Spec,
) -> None:
    assert xm.m4_theta(independent_spec, (1, 1)) == pytest.approx(1.0)
    with pytest.raises(xm.UndefinedEstimateError):
        xm.m4_theta(independent_spec, (1, 1), None, "star")


def test_exact_oracle_matches_enumeration(shifted_lags: xm.M4Spec) -> None:
    for n in (1, 2, 3, 5, 12):
        u = analytic_levels(n, (1.0, 2.0), shifted_lags.scales)
        got = -xm.exact_joint_cdf_m4(shifted_lags, n, u, log=True)
        assert got == pytest.approx(_brute_neg_log_cdf(shifted_lags, n, u.u), rel=1e-12)


@pytest.mark.parametrize("tau", [(1.0, 1.0), (2.0, 1.0), (1.0, 3.0)])
def test_exact_oracle_converges(
    shifted_lags: xm.M4Spec, single_factor: xm.M4Spec, two_factor: xm.M4Spec, tau
) -> None:
    n = 1_000_000
    for spec in (shifted_lags, single_factor, two_factor):
        u = analytic_levels(n, tau, spec.scales)
        neg_log = -xm.exact_joint_cdf_m4(spec, n, u, log=True)
        assert abs(neg_log - theory.m4_theta_gamma(spec, tau)) < 1e-4


def test_exact_oracle_single_margin(shifted_lags: xm.M4Spec) -> None:
    n = 1_000_000
    u = [math.inf, n * shifted_lags.scales[1]]
    theta_2 = -xm.exact_joint_cdf_m4(shifted_lags, n, u, log=True)
    assert theta_2 == pytest.approx(7 / 13, abs=1e-5)
    with pytest.raises(ValueError, match="levels"):
        xm.exact_joint_cdf_m4(shifted_lags, n, [1.0])


def test_chibar_equality(single_factor: xm.M4Spec, two_factor: xm.M4Spec) -> None:
    for spec in (single_factor, two_factor):
        out = theory.chibar_equality_check(spec)
        assert out["max_extrapolated_gap"] < 1e-3
        # the finite-u gap shrinks monotonically as u -> 1
        gaps = out["gaps"]["1,2"]
        assert all(b < a for a, b in itertools.pairwise(gaps))
    with pytest.raises(ValueError):
        theory.chibar_equality_check(single_factor, [0.5])


def test_limit_cdfs(single_factor: xm.M4Spec) -> None:
    h_hat, h = theory.limit_cdfs(single_factor, [1.0, 1.0])
    assert h_hat == pytest.approx(math.exp(-9 / 8))
    assert h == pytest.approx(math.exp(-6 / 8))
    x = np.array([[2.0, 0.5], [1.0, 4.0]])
    _, h = theory.limit_cdfs(single_factor, x)
    expected = np.exp(-np.maximum(6 / (8 * x[:, 0]), 5 / (8 * x[:, 1])))
    np.testing.assert_allclose(h, expected)
    with pytest.raises(ValueError):
        theory.limit_cdfs(single_factor, [1.0, -1.0])


def test_theta_constant(independent_spec: xm.M4Spec, single_factor: xm.M4Spec) -> None:
    assert theory.is_theta_constant(independent_spec)
    assert not theory.is_theta_constant(single_factor)
    assert len(theory.default_tau_grid(2)) == 9
    with pytest.raises(ValueError):
        theory.default_tau_grid(9)
