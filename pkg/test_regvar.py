import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bernstein import DEFAULT_KEYS, get_exponent
from errors import DomainError
from regvar import alpha_from_index, check_de_haan, estimate_rv_index, fit_potter_bound


@given(rho=st.floats(min_value=-1.0, max_value=1.0, allow_nan=False))
@settings(max_examples=50, deadline=None)
def test_pure_power_index_is_recovered(rho):
    fit = estimate_rv_index(lambda x: x**rho, 1e6)
    assert fit.index == pytest.approx(rho, abs=1e-10)
    assert fit.residual < 1e-10


@pytest.mark.parametrize("key,alpha", [("stable(0.5)", 0.5), ("stable(1)", 1.0), ("stable(1.5)", 1.5)])
def test_stable_derivative_index(key, alpha):
    exp = get_exponent(key)
    fit = estimate_rv_index(exp.phi_prime, 1e10)
    assert fit.index == pytest.approx(alpha / 2.0 - 1.0, abs=1e-8)
    assert fit.alpha == pytest.approx(alpha, abs=1e-7)


def test_variance_gamma_derivative_has_index_minus_one():
    fit = estimate_rv_index(get_exponent("vg").phi_prime, 1e10)
    assert fit.index == pytest.approx(-1.0, abs=1e-6)
    assert fit.alpha == pytest.approx(0.0, abs=1e-5)


def test_sweep_exposes_drift_toward_the_limit():
    fit = estimate_rv_index(get_exponent("vg").phi_prime, 1e10, decades=4)
    assert len(fit.grid) == 5
    assert fit.grid[-1] == 1e10
    errors = [abs(i + 1.0) for i in fit.sweep_indices]
    assert errors[-1] <= errors[0]


def test_non_positive_values_are_rejected():
    with pytest.raises(DomainError):
        estimate_rv_index(lambda x: -x, 1e3)
    with pytest.raises(DomainError):
        estimate_rv_index(lambda x: x, 0.0)
    with pytest.raises(DomainError):
        estimate_rv_index(lambda x: x, 1e3, x_points=(1.0, 2.0))


@pytest.mark.parametrize("index,alpha", [(0.5, 2.0), (-2.0, 0.0), (-0.75, 0.5)])
def test_alpha_from_index_is_clipped(index, alpha):
    assert alpha_from_index(index) == alpha


def test_de_haan_for_variance_gamma():
    # ℓ(λ) = λφ′(λ), L(λ) = φ(λ)
    report = check_de_haan(lambda lam: lam / (1.0 + lam), 1e8)
    assert report.increasing
    assert report.deviation_shrinking
    assert report.deviations[-1] < 1e-6
    for x, value, target in report.samples:
        assert value == pytest.approx(target, abs=1e-6)


def test_de_haan_rejects_bad_limits():
    with pytest.raises(DomainError):
        check_de_haan(lambda lam: 1.0, 1.0, lower=2.0)


def test_potter_bound_for_pure_power():
    fit = fit_potter_bound(lambda x: x**-0.5, delta=0.1, lam_min=1.0)
    assert fit.index == pytest.approx(-0.5, abs=1e-10)
    assert fit.delta_prime == pytest.approx(0.4, abs=1e-10)
    assert fit.bounded
    assert fit.constant == pytest.approx(1.0, rel=1e-9)


def test_potter_bound_reports_growth_as_unbounded():
    fit = fit_potter_bound(lambda x: x**-0.5, delta=0.1, lam_min=1.0, index=-1.5)
    assert not fit.bounded
    assert fit.decade_maxima[-1] > 10.0 * fit.decade_maxima[0]


def test_potter_bound_needs_positive_delta():
    with pytest.raises(DomainError):
        fit_potter_bound(lambda x: x, delta=0.0, lam_min=1.0)


def test_de_haan_with_constant_ell_is_exact():
    # L(λ) = log λ
    report = check_de_haan(lambda lam: 1.0, 1e8, lower=1.0)
    assert report.increasing
    np.testing.assert_allclose(report.L_over_ell, np.log(report.lam_grid), rtol=1e-10)
    assert max(report.deviations) < 1e-9
    for x, value, target in report.samples:
        assert value == pytest.approx(math.log(x), abs=1e-9)


def test_de_haan_with_inverse_log_ell():
    # L(λ) = log log λ − log log 2 above λ = 2
    report = check_de_haan(lambda lam: 1.0 / math.log(lam), 1e8, lower=2.0)
    assert report.increasing
    assert report.deviation_shrinking
    log_lam = math.log(1e8)
    for x, value, target in report.samples:
        assert value == pytest.approx(log_lam * math.log1p(math.log(x) / log_lam), rel=1e-8)
        if x <= 3.0:
            assert abs(value - target) <= 0.05
    assert report.deviations[-1] == pytest.approx(max(abs(v - t) for _, v, t in report.samples))


@given(key=st.sampled_from([k for k in DEFAULT_KEYS if get_exponent(k).alpha > 0]))
@settings(max_examples=20, deadline=None)
def test_phi_index_exceeds_derivative_index_by_one(key):
    exp = get_exponent(key)
    phi_fit = estimate_rv_index(lambda x: float(exp.phi(x)), 1e10)
    dphi_fit = estimate_rv_index(lambda x: float(exp.phi_prime(x)), 1e10)
    assert phi_fit.index - dphi_fit.index == pytest.approx(1.0, abs=0.05)


def test_example3_derivative_index_approaches_zero():
    fit = estimate_rv_index(get_exponent("example3").phi_prime, 1e10)
    # slowly varying correction of order 1/log λ
    assert abs(fit.index) <= 0.05
    assert np.all(np.diff(np.abs(fit.sweep_indices)) < 0)


def test_potter_bound_with_oscillating_factor():
    f = lambda x: x**-0.5 * (math.sin(math.log(x)) + 2.0)  # noqa: E731
    fit = fit_potter_bound(f, delta=0.1, lam_min=1.0, index=-0.5)
    assert fit.bounded
    assert 1.0 <= fit.constant <= 3.0 + 1e-9


def test_potter_bound_for_variance_gamma_derivative():
    fit = fit_potter_bound(get_exponent("vg").phi_prime, delta=0.1, lam_min=1.0)
    assert fit.bounded
    assert math.isfinite(fit.constant)
