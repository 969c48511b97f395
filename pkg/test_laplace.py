import math

import numpy as np
import pytest
from scipy import special

from errors import DomainError, NumericalError
from laplace import (
    small_r_integral,
    check_small_r_integral_bounds,
    integrate_0_inf,
    invert_laplace,
    inversion_profile,
    log_grid,
    pure_power_value,
)
from ratios import Verdict, judge


def test_log_grid_endpoints():
    g = log_grid(1e-4, 1e-1, 4)
    np.testing.assert_allclose(g, [1e-4, 1e-3, 1e-2, 1e-1], rtol=1e-12)


@pytest.mark.parametrize("lo,hi,n", [(0.0, 1.0, 5), (1.0, 0.5, 5), (1e-3, 1.0, 1)])
def test_log_grid_rejects_bad_input(lo, hi, n):
    with pytest.raises(DomainError):
        log_grid(lo, hi, n)


def test_integrate_exponential():
    res = integrate_0_inf(lambda t: math.exp(-t))
    assert res.converged
    assert res.value == pytest.approx(1.0, rel=1e-10)


def test_integrate_heavy_tail_with_scale_point():
    # ∫ 1/(1+t)² = 1
    res = integrate_0_inf(lambda t: 1.0 / (1.0 + t) ** 2, scale_points=[1.0])
    assert res.value == pytest.approx(1.0, rel=1e-10)


def test_integrate_rejects_tiny_tolerance():
    with pytest.raises(DomainError):
        integrate_0_inf(lambda t: math.exp(-t), tol=1e-14)


@pytest.mark.parametrize("t", [1e-3, 0.1, 1.0])
def test_inverse_sqrt_transform(t):
    value = invert_laplace(lambda p: 1 / p**0.5, t)
    assert value == pytest.approx(t**-0.5 / math.sqrt(math.pi), rel=1e-6)


def test_inverse_of_shifted_pole():
    assert invert_laplace(lambda p: 1 / (p + 1), 0.5) == pytest.approx(math.exp(-0.5), rel=1e-6)


def test_talbot_cross_check_agrees():
    value = invert_laplace(lambda p: 1 / p**2, 0.7, cross_check=True)
    assert value == pytest.approx(0.7, rel=1e-6)


def test_oscillating_transform_reports_disagreement():
    with pytest.raises(NumericalError) as info:
        invert_laplace(lambda p: 10 / (p**2 + 100), 2.0)
    assert "estimates" in info.value.diagnostics


def test_inversion_argument_checks():
    with pytest.raises(DomainError):
        invert_laplace(lambda p: 1 / p, 0.0)
    with pytest.raises(DomainError):
        invert_laplace(lambda p: 1 / p, 1.0, method="euler")


def test_inversion_profile():
    prof = inversion_profile(lambda p: 1 / p**2, [0.1, 0.5, 1.0])
    np.testing.assert_allclose(prof.values, [0.1, 0.5, 1.0], rtol=1e-8)
    assert max(prof.disagreement) < 1e-6


@pytest.mark.parametrize("p", [1.5, 2.0, 3.5])
@pytest.mark.parametrize("b", [0.0, 0.5, 1.0])
def test_small_r_integral_pure_power(p, b):
    value = small_r_integral(lambda t: t ** (-b), p, 1.0, 0.1)
    assert value == pytest.approx(pure_power_value(p, b, 1.0, 0.1), rel=1e-8)


def test_small_r_integral_needs_p_above_one():
    with pytest.raises(DomainError):
        small_r_integral(lambda t: 1.0, 1.0, 1.0, 0.1)


def test_small_r_bounds_are_constant_for_pure_power():
    sweep = check_small_r_integral_bounds(lambda t: t**-0.5, 2.0, 2.0, log_grid(1e-4, 1e-1, 7), b=0.5)
    assert sweep.verdict is Verdict.BOUNDED
    assert sweep.spread == pytest.approx(1.0, abs=1e-7)
    np.testing.assert_allclose(sweep.ratios, special.gamma(1.5), rtol=1e-8)


def test_small_r_bounds_with_slowly_varying_weight():
    w = lambda t: t**-0.5 * (1.0 + abs(math.log(t))) ** 0.5  # noqa: E731
    sweep = check_small_r_integral_bounds(w, 2.0, 1.0, log_grid(1e-4, 1e-1, 7), b=0.5)
    assert sweep.ok


def test_judge_policy():
    r = log_grid(1e-4, 1e-1, 7)
    assert judge(r, np.full(7, 3.0), "const").verdict is Verdict.BOUNDED
    assert judge(r, r**-0.5, "power").verdict is Verdict.FAILED
    assert judge(r, 1.0 + r, "to one", expect_limit_one=True).verdict is Verdict.CONVERGES_TO_1
    partial = judge(r, [float("nan")] + [1.0] * 6, "partial")
    assert partial.partial and partial.ok
    assert judge(r, [float("nan")] * 7, "empty").verdict is Verdict.FAILED


# (integrand, exact) pairs; growing powers go through logs so large t stays finite
CLOSED_FORM_INTEGRALS = [
    ("exp", lambda t: math.exp(-t), 1.0),
    ("exp_2t", lambda t: math.exp(-2.0 * t), 0.5),
    ("t_exp", lambda t: t * math.exp(-t), 1.0),
    ("t2_exp", lambda t: math.exp(2.0 * math.log(t) - t), 2.0),
    ("t1.5_exp", lambda t: math.exp(1.5 * math.log(t) - t), special.gamma(2.5)),
    ("t-0.3_exp", lambda t: t**-0.3 * math.exp(-t), special.gamma(0.7)),
    ("t-0.5_exp", lambda t: t**-0.5 * math.exp(-t), math.sqrt(math.pi)),
    ("t-2.5_exp_inv", lambda t: math.exp(-2.5 * math.log(t) - 1.0 / t), special.gamma(1.5)),
    ("t-1.5_exp_inv", lambda t: math.exp(-1.5 * math.log(t) - 1.0 / t), math.sqrt(math.pi)),
    ("gauss", lambda t: math.exp(-t * t), math.sqrt(math.pi) / 2.0),
    ("t_gauss", lambda t: t * math.exp(-t * t), 0.5),
    ("inv_sq", lambda t: 1.0 / ((1.0 + t) * (1.0 + t)), 1.0),
    ("inv_cube", lambda t: 1.0 / ((1.0 + t) * (1.0 + t) * (1.0 + t)), 0.5),
    ("cauchy", lambda t: 1.0 / (1.0 + t * t), math.pi / 2.0),
    ("sqrt_pole", lambda t: t**-0.5 / (1.0 + t), math.pi),
    ("sech", lambda t: 2.0 * math.exp(-t) / (1.0 + math.exp(-2.0 * t)), math.pi / 2.0),
    ("bose", lambda t: t * math.exp(-t) / -math.expm1(-t), math.pi**2 / 6.0),
    ("frullani", lambda t: -math.exp(-t) * math.expm1(-t) / t, math.log(2.0)),
    ("log_exp", lambda t: math.log1p(t) * math.exp(-t), math.e * special.exp1(1.0)),
    ("bessel_k0", lambda t: math.exp(-t - 1.0 / t) / t, 2.0 * special.kv(0, 2.0)),
    ("bessel_k_half", lambda t: t**-0.5 * math.exp(-t - 1.0 / t), math.sqrt(math.pi) * math.exp(-2.0)),
]


@pytest.mark.parametrize("name,f,exact", CLOSED_FORM_INTEGRALS, ids=[c[0] for c in CLOSED_FORM_INTEGRALS])
def test_error_estimate_covers_the_true_error(name, f, exact):
    res = integrate_0_inf(f)
    assert res.converged
    # reference rounding
    assert abs(res.value - exact) <= res.abs_error_estimate + 1e-15 * abs(exact)


def test_gamma_half_and_inverted_gamma_integrals():
    assert integrate_0_inf(lambda t: t**-0.5 * math.exp(-t)).value == pytest.approx(math.sqrt(math.pi), abs=1e-10)
    assert integrate_0_inf(lambda t: math.exp(-2.5 * math.log(t) - 1.0 / t)).value == pytest.approx(0.8862269254527580, abs=1e-9)


def test_tolerance_floor_is_accepted():
    assert integrate_0_inf(lambda t: math.exp(-t), tol=1e-12).value == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("t", [1e-3, 0.5, 5.0])
def test_inverse_of_one_over_lambda_is_constant(t):
    assert invert_laplace(lambda p: 1 / p, t) == pytest.approx(1.0, abs=1e-8)


def test_small_r_ratio_with_linear_correction_tends_to_gamma():
    r = log_grid(1e-6, 1e-1, 6)
    w = lambda t: t**-0.5 * (1.0 + t)  # noqa: E731
    sweep = check_small_r_integral_bounds(w, 2.0, 1.0, r, b=0.5)
    g = special.gamma(1.5)
    # I(r) = Γ(1.5) r^-1.5 + Γ(0.5) r^-0.5 exactly
    np.testing.assert_allclose(sweep.ratios, (g + r * math.sqrt(math.pi)) / (1.0 + r), rtol=1e-8)
    assert abs(sweep.ratios[0] - g) < abs(sweep.ratios[-1] - g)
    assert sweep.ratios[0] == pytest.approx(g, rel=1e-5)
    assert sweep.ok
