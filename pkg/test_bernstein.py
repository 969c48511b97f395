import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bernstein import (
    DEFAULT_KEYS,
    LaplaceExponent,
    bernstein_grid_report,
    compose,
    conjugate,
    get_entry,
    get_exponent,
    list_catalog,
    numerical_derivative,
)
from errors import DomainError

lams = st.floats(min_value=1e-6, max_value=1e6, allow_nan=False, allow_infinity=False)


def test_stable_values_and_derivative():
    exp = get_exponent("stable(1)")
    assert exp.phi(4.0) == pytest.approx(2.0, rel=1e-15)
    assert exp.phi_prime(4.0) == pytest.approx(0.25, rel=1e-15)
    assert exp.alpha == 1.0


def test_variance_gamma_is_log1p():
    exp = get_exponent("vg")
    lam = np.array([0.5, 1.0, 10.0])
    np.testing.assert_allclose(exp.phi(lam), np.log1p(lam), rtol=1e-15)
    assert exp.alpha == 0.0
    assert exp.kill_rate == 0.0


def test_geo_two_matches_variance_gamma():
    lam = np.logspace(-3, 3, 13)
    np.testing.assert_allclose(get_exponent("geo(2)").phi(lam), get_exponent("vg").phi(lam), rtol=1e-14)


def test_keys_are_normalized_and_cached():
    assert get_exponent("stable(1.0)") is get_exponent("stable(1)")
    assert get_exponent(" geo-iter(2, 2) ") is get_exponent("geo-iter(2,2)")


@pytest.mark.parametrize("key", ["stable(3)", "geo(0)", "nope", "geo-iter(2,1.5)", "stable(x)"])
def test_bad_keys_raise(key):
    with pytest.raises(DomainError):
        get_exponent(key)


@pytest.mark.parametrize("lam", [0.0, -1.0, float("inf")])
def test_phi_rejects_non_positive_arguments(lam):
    with pytest.raises(DomainError):
        get_exponent("vg").phi(lam)


def test_catalog_lists_default_keys():
    entries = list_catalog()
    assert [e.key for e in entries] == list(DEFAULT_KEYS)
    for e in entries:
        assert e.exponent.alpha == e.expected_alpha


def test_compose_stable_halves_the_index():
    half = compose(get_exponent("stable(1)"), get_exponent("stable(1)"))
    assert half.phi(16.0) == pytest.approx(2.0, rel=1e-14)
    assert half.alpha == pytest.approx(0.5)
    assert half.family == "compose"


def test_conjugate_of_vg_and_of_stable():
    conj = conjugate(get_exponent("vg"))
    assert conj.phi(3.0) == pytest.approx(3.0 / math.log(4.0), rel=1e-14)
    assert conj.alpha == 2.0
    assert conjugate(get_exponent("stable(1)")).phi(9.0) == pytest.approx(3.0, rel=1e-14)


def test_example3_is_the_conjugate_of_geo_one():
    lam = np.logspace(-4, 8, 25)
    np.testing.assert_allclose(get_exponent("example3").phi(lam), conjugate(get_exponent("geo(1)")).phi(lam), rtol=1e-13)


def test_conjugate_warns_for_non_complete_input():
    plain = LaplaceExponent("plain", lambda lam, m: m.log1p(lam), is_complete_bernstein=False)
    with pytest.warns(RuntimeWarning):
        conjugate(plain)


def test_kill_rate_is_detected_from_a_plateau():
    killed = LaplaceExponent("killed", lambda lam, m: 0.5 + lam)
    assert killed.kill_rate == pytest.approx(0.5)


def test_numerical_derivative_is_accurate():
    lam = np.array([0.1, 1.0, 100.0])
    np.testing.assert_allclose(numerical_derivative(np.log1p, lam), 1.0 / (1.0 + lam), rtol=1e-9)


def test_generic_exponent_uses_numerical_derivative():
    plain = LaplaceExponent("sqrt", lambda lam, m: m.sqrt(lam))
    assert not plain.has_closed_derivative
    assert plain.phi_prime(4.0) == pytest.approx(0.25, rel=1e-8)


def test_characteristic_exponent_is_phi_of_squared_norm():
    exp = get_exponent("vg")
    xi = np.array([[3.0, 4.0, 0.0]])
    assert exp.characteristic_exponent(xi)[0] == pytest.approx(math.log1p(25.0))


def test_mpmath_evaluation_agrees_with_numpy():
    exp = get_exponent("geo-iter(2,2)")
    assert float(exp.phi_mp(7.0)) == pytest.approx(exp.phi(7.0), rel=1e-13)
    assert float(exp.phi_prime_mp(7.0)) == pytest.approx(exp.phi_prime(7.0), rel=1e-10)


@pytest.mark.parametrize("key", DEFAULT_KEYS)
def test_grid_report_on_catalog(key):
    report = bernstein_grid_report(get_exponent(key), np.logspace(-6, 6, 121))
    assert report["increasing"]
    assert report["concave"]
    assert report["phi_prime_positive"]
    assert report["bernstein_inequality"]


def test_drift_has_closed_forms():
    entry = get_entry("drift")
    assert entry.exponent.drift == 1.0
    assert float(entry.closed_form_u(2.0)) == 1.0


@given(key=st.sampled_from(DEFAULT_KEYS), lam=lams)
@settings(max_examples=200, deadline=None)
def test_bernstein_inequality_property(key, lam):
    exp = get_exponent(key)
    phi = exp.phi(lam)
    assert phi > 0
    assert lam * exp.phi_prime(lam) - phi <= 1e-12


@given(key=st.sampled_from(["stable(0.5)", "stable(1)", "stable(1.5)", "vg", "geo(1)", "geo(1.5)"]), lam=lams)
@settings(max_examples=200, deadline=None)
def test_conjugate_pair_multiplies_to_lambda(key, lam):
    exp = get_exponent(key)
    assert exp.phi(lam) * conjugate(exp).phi(lam) == pytest.approx(lam, rel=1e-13)


@given(lam=lams)
@settings(max_examples=100, deadline=None)
def test_compose_is_associative(lam):
    a, b, c = get_exponent("vg"), get_exponent("stable(1)"), get_exponent("geo(1)")
    left = compose(compose(a, b), c)
    right = compose(a, compose(b, c))
    assert left.phi(lam) == pytest.approx(right.phi(lam), rel=1e-12)
    assert left.phi_prime(lam) == pytest.approx(right.phi_prime(lam), rel=1e-10)
