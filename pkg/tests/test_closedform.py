import math
from fractions import Fraction
from math import comb

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, special, stats

from regenlab import closedform as cf
from regenlab.errors import DegenerateModelError, ParameterError

THIRD = Fraction(1, 3)


def test_gw_iterate_examples():
    assert cf.gw_iterate(0, 0.3) == pytest.approx(0.3)
    assert cf.gw_iterate(3, Fraction(0)) == Fraction(3, 4)
    assert cf.gw_iterate(2, 1.0) == 1.0
    with pytest.raises(ParameterError):
        cf.gw_iterate(-1, 0.5)


def test_gw_iterate_vs_composition():
    s = np.array([0.0, 0.25, 0.5, 0.9])
    composed = s.copy()
    for n in range(1, 1001):
        composed = 1 / (2 - composed)
        assert np.max(np.abs(composed - cf.gw_iterate(n, s))) <= 1e-12


@given(st.integers(0, 500), st.integers(0, 500), st.sampled_from([0.0, 0.25, 0.5, 0.9, 1.0]))
def test_gw_semigroup(a, b, s):
    assert abs(cf.gw_iterate(a + b, s) - cf.gw_iterate(a, cf.gw_iterate(b, s))) <= 1e-12


def test_gw_iterate_exact_rational():
    s = Fraction(1, 7)
    composed = s
    for n in range(1, 30):
        composed = 1 / (2 - composed)
        assert cf.gw_iterate(n, s) == composed


def test_extinction_cdfs():
    assert cf.gw_extinction_cdf_discrete(100, 1, 1) == pytest.approx((100 / 101) ** 100)
    assert cf.gw_extinction_cdf_discrete(100, 0, 1) == 1.0
    assert abs(cf.gw_extinction_cdf_discrete(10_000, 1, 1) - math.exp(-1)) <= 1e-4
    assert cf.cb_extinction_cdf(1, 1) == pytest.approx(0.36788, abs=1e-5)
    assert cf.cb_extinction_cdf(0, 2) == 1.0
    assert cf.cb_extinction_cdf(1, 1e12) == pytest.approx(1.0)
    with pytest.raises(ParameterError):
        cf.cb_extinction_cdf(1, 0)


def test_gwi_params():
    assert cf.GwiParams(THIRD).delta == Fraction(1, 2)
    for bad in (0, 0.5, 0.6):
        with pytest.raises(ParameterError):
            cf.GwiParams(bad)


def test_cutout_cdf_values():
    # immigration P(K = k) = (1-p) p^k: P(L <= n) = E[(n/(n+1))^K]
    params = cf.GwiParams(THIRD)
    assert cf.cutout_length_cdf(params, 0) == Fraction(2, 3)
    assert cf.cutout_length_cdf(params, 2) == Fraction(6, 7)
    for n in range(0, 40):
        direct = cf.immigration_pgf(params, cf.gw_iterate(n, Fraction(0)))
        assert cf.cutout_length_cdf(params, n) == direct
    vals = cf.cutout_length_cdfs(params, 10_000)
    assert (np.diff(vals) >= 0).all() and vals[-1] == pytest.approx(1, abs=1e-4)


def test_cutout_cdf_against_series():
    # sum_k (1-p) p^k f_n(0)^k evaluated term by term
    p = 0.3
    for n in (0, 1, 5, 50):
        f = n / (n + 1)
        series = sum((1 - p) * p**k * f**k for k in range(200))
        assert cf.cutout_length_cdf(cf.GwiParams(p), n) == pytest.approx(series, rel=1e-13)


def test_renewal_density_values():
    params = cf.GwiParams(THIRD)
    assert cf.gwi_renewal_density(params, 0) == 1
    assert cf.gwi_renewal_density(params, 1) == Fraction(2, 3)
    assert cf.gwi_renewal_density(params, 2) == Fraction(8, 15)
    floats = cf.gwi_renewal_densities(cf.GwiParams(1 / 3), 200)
    for n in (0, 1, 2, 17, 200):
        assert floats[n] == pytest.approx(float(cf.gwi_renewal_density(params, n)), rel=1e-12)


def test_renewal_density_slope():
    params = cf.GwiParams(1 / 3)
    xs = np.unique(np.geomspace(1e3, 1e5, 50).astype(int))
    u = cf.gwi_renewal_densities(params, int(xs[-1]))[xs]
    slope = stats.linregress(np.log(xs), np.log(u)).slope
    assert abs(slope + 0.5) <= 0.05


def test_stable_exponent():
    assert cf.stable_laplace_exponent(0.5, 4) == 2
    assert cf.stable_laplace_exponent(0.3, 0) == 0
    for rho in (0.2, 0.5, 0.9):
        assert cf.stable_laplace_exponent(rho, 1) == 1
    with pytest.raises(ParameterError):
        cf.stable_laplace_exponent(1.0, 2)


@pytest.mark.parametrize("rho", [0.25, 1 / 3, 0.5, 0.75])
def test_stable_tail_consistent_with_exponent(rho):
    # int (1 - e^{-lam x}) mu(dx) = int_0^inf lam e^{-lam x} mu(S_x) dx
    for lam in np.linspace(0.2, 5, 10):
        val, _ = integrate.quad(lambda x: lam * math.exp(-lam * x) * cf.stable_levy_tail(rho, x), 0, np.inf)
        assert val == pytest.approx(lam**rho, rel=1e-7)


def test_bm_tail():
    assert cf.bm_inverse_lt_tail(1) == pytest.approx(0.797885, abs=1e-6)
    assert cf.bm_inverse_lt_tail(4) == pytest.approx(cf.bm_inverse_lt_tail(1) / 2)
    tail, _ = integrate.quad(lambda x: x**-1.5 / math.sqrt(2 * math.pi), 1, np.inf)
    assert tail == pytest.approx(cf.bm_inverse_lt_tail(1), rel=1e-10)
    val, _ = integrate.quad(lambda x: math.exp(-x) * cf.bm_inverse_lt_tail(x), 0, np.inf)
    assert val == pytest.approx(math.sqrt(2), abs=1e-6)
    model = cf.brownian_inverse_local_time()
    assert model.laplace_exponent(0) == 0
    with pytest.raises(ParameterError):
        cf.bm_inverse_lt_tail(0)


def test_subordinator_exponent_shape():
    for model in (cf.stable_subordinator(0.4), cf.brownian_inverse_local_time()):
        lam = np.linspace(0, 10, 41)
        phi = np.array([model.laplace_exponent(x) for x in lam])
        assert phi[0] == 0 and (np.diff(phi) >= 0).all() and (np.diff(phi, 2) <= 1e-12).all()


def test_gd_laplace_subordinator_values():
    half = cf.stable_subordinator(0.5)
    assert cf.gd_laplace_subordinator(half, 1.3, 0, 0) == pytest.approx(1.0)
    assert cf.gd_laplace_subordinator(half, 1, 1, 1) == pytest.approx((math.sqrt(2) - 1) / math.sqrt(3))
    assert cf.gd_laplace_subordinator(half, 1, 1, 0) == pytest.approx(0.70711, abs=1e-5)
    for rho in (0.2, 0.7):
        assert cf.gd_laplace_subordinator(cf.stable_subordinator(rho), 2, 3, 0) == pytest.approx((2 / 5) ** rho)
    with pytest.raises(DegenerateModelError):
        cf.gd_laplace_subordinator(cf.SubordinatorModel(lambda l: 0.0, lambda l: 0.0), 1, 1, 1)


def test_gd_laplace_subordinator_monotone():
    model = cf.stable_subordinator(0.4)
    grid = np.linspace(0, 4, 9)
    for theta in (0.5, 2):
        for other in grid:
            in_alpha = [cf.gd_laplace_subordinator(model, theta, a, other) for a in grid]
            in_beta = [cf.gd_laplace_subordinator(model, theta, other, b) for b in grid]
            assert all(y <= x + 1e-15 for x, y in zip(in_alpha, in_alpha[1:]))
            assert all(y <= x + 1e-15 for x, y in zip(in_beta, in_beta[1:]))


def test_gd_laplace_discrete_deterministic():
    mgf = lambda lam: math.exp(-lam)
    assert cf.gd_laplace_discrete(mgf, 1.0, 0, 0) == pytest.approx(1.0)
    assert cf.gd_laplace_discrete(mgf, 1.0, 1.0, 0) == pytest.approx((1 - math.exp(-1)) / (1 - math.exp(-2)))
    assert cf.gd_laplace_discrete(mgf, 1.0, 1.0, 0) == pytest.approx(0.73106, abs=1e-5)
    with pytest.raises(DegenerateModelError):
        cf.gd_laplace_discrete(lambda lam: 1.0, 1.0, 1.0, 1.0)


def test_ssrw_tail_small():
    assert cf.ssrw_first_return_tail(0) == 1
    assert cf.ssrw_first_return_tail(2) == Fraction(1, 2)
    assert cf.ssrw_first_return_tail(4) == Fraction(3, 8)
    assert cf.ssrw_first_return_tail(6) == Fraction(5, 16)
    assert cf.ssrw_first_return_tail(5) == Fraction(3, 8)


def test_ssrw_tail_matches_central_binomial():
    # P(first return > 2k) = P(S_2k = 0) = C(2k, k) / 4^k
    for k in list(range(0, 200)) + [1234, 5000]:
        assert cf.ssrw_first_return_tail(2 * k) == Fraction(comb(2 * k, k), 4**k)


@pytest.mark.parametrize("m", [10_001, 10_002, 20_000, 123_457])
def test_ssrw_tail_float_fallback(m):
    k = m // 2
    exact = mpmath.binomial(2 * k, k) / mpmath.mpf(4) ** k
    got = cf.ssrw_first_return_tail(m)
    assert isinstance(got, float)
    assert abs(got / float(exact) - 1) < 1e-12
    assert cf.ssrw_first_return_tails(m)[m] == pytest.approx(got, rel=1e-12)


def test_ssrw_tail_renewal_identity():
    tails = cf.ssrw_first_return_tails(10_000)
    pmf = tails[:-1] - tails[1:]  # P(R = k), k = 1..10000
    k = np.arange(1, 10_001)
    i = np.arange(0, 10_001, 2)
    u = np.exp(special.gammaln(i + 1) - 2 * special.gammaln(i / 2 + 1) - i * math.log(2))  # P(S_i = 0)
    for lam in (0.5, 1.0, 2.0):
        lhs = np.sum(np.exp(-lam * i) * u)
        rhs = 1 / (1 - np.sum(pmf * np.exp(-lam * k)))
        assert lhs == pytest.approx(rhs, abs=1e-8)


def test_reflected_tails():
    assert cf.reflected_ssrw_tail(4, "absolute") == 3 / 8
    assert cf.reflected_ssrw_tail(4, "minimum") == 3 / 16
    assert cf.reflected_ssrw_tail(0, "minimum") == 1.0
    assert cf.reflected_ssrw_tail(1, "minimum") == 0.5
    assert cf.reflected_ssrw_tail(np.array([0, 1, 2]), "minimum").tolist() == [1.0, 0.5, 0.25]
    with pytest.raises(ParameterError):
        cf.reflected_ssrw_tail(3, "other")


@pytest.mark.parametrize("reflection", ["minimum", "absolute"])
def test_reflected_mgf(reflection):
    mgf = cf.reflected_ssrw_mgf(4, reflection, kmax=20_000)
    assert mgf(0) == pytest.approx(1.0)
    # direct sum of the exact pmf
    tails = np.array([float(cf.reflected_ssrw_tail(k, reflection)) for k in range(401)])
    pmf = tails[:-1] - tails[1:]
    direct = np.sum(pmf * np.exp(-2.0 * np.arange(1, 401) / 4))
    assert mgf(2.0) == pytest.approx(direct, abs=1e-12)


def test_half_normal_cdf():
    assert cf.half_normal_cdf(0) == 0 and cf.half_normal_cdf(-1) == 0
    assert cf.half_normal_cdf(40) == 1
    for x in (0.01, 0.3, 1.0, 2.5, 6.0):
        assert abs(cf.half_normal_cdf(x) - float(mpmath.erf(x / mpmath.sqrt(2)))) <= 1e-10
    assert cf.half_normal_cdf(np.array([0.0, 1.0])).shape == (2,)


def test_arcsine_values():
    assert cf.generalized_arcsine_cdf(0.5, 0.5) == pytest.approx(0.5, abs=1e-10)
    assert cf.generalized_arcsine_cdf(0.75, 0.5) == pytest.approx(2 / 3, abs=1e-10)
    assert cf.generalized_arcsine_cdf(-1, 0.3) == 0 and cf.generalized_arcsine_cdf(2, 0.3) == 1
    x = np.linspace(0.001, 0.999, 37)
    closed = 2 / np.pi * np.arcsin(np.sqrt(x))
    assert np.max(np.abs(cf.generalized_arcsine_cdf(x, 0.5) - closed)) <= 1e-9


@pytest.mark.parametrize("rho", [0.1, 0.25, 1 / 3, 0.7, 0.9])
def test_arcsine_matches_incomplete_beta(rho):
    x = np.linspace(0.0005, 0.9995, 41)
    assert np.max(np.abs(cf.generalized_arcsine_cdf(x, rho) - special.betainc(rho, 1 - rho, x))) <= 1e-8


def test_discrete_reference_cdfs():
    x = np.arange(-1, 30)
    assert np.allclose(cf.geometric_cdf(x, 0.2), stats.geom.cdf(x, 0.2))
    assert np.allclose(cf.negative_binomial_cdf(x, 0.3, 3), stats.nbinom.cdf(x - 3, 3, 0.3))
    assert cf.exponential_cdf(1.0, 2.0) == pytest.approx(1 - math.exp(-2))
    assert cf.exponential_cdf(-1.0, 2.0) == 0


def test_reference_dispatch():
    assert cf.reference_cdf("generalized_arcsine", 0.5, rho=0.5) == pytest.approx(0.5)
    f = cf.reference_distribution("negative_binomial", q=0.5, m=2)
    assert f(2) == pytest.approx(0.25)
    with pytest.raises(ParameterError):
        cf.reference_cdf("cauchy", 1.0)
