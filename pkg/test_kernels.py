import math

import numpy as np
import pytest

from bernstein import get_exponent
from errors import DomainError, PreconditionError
from kernels import (
    KernelKind,
    check_green_diff,
    green_comparison,
    green_kernel,
    jump_kernel,
    jump_mass_away,
    kernel_curve,
    log_slope,
    random_admissible_pairs,
    shell_mass_bound,
    sphere_area,
    sweep_jump_kernel,
)
from laplace import log_grid


@pytest.mark.parametrize("d,area", [(1, 2.0), (2, 2.0 * math.pi), (3, 4.0 * math.pi)])
def test_sphere_area(d, area):
    assert sphere_area(d) == pytest.approx(area, rel=1e-14)


def test_drift_green_function_is_newtonian():
    exp = get_exponent("drift")
    for r in (0.05, 0.5, 2.0):
        assert green_kernel(exp, 3, r) == pytest.approx(1.0 / (4.0 * math.pi * r), rel=1e-7)


@pytest.mark.parametrize("r", [0.01, 0.1, 1.0])
def test_stable_kernels_in_three_dimensions(r):
    exp = get_exponent("stable(1)")
    assert jump_kernel(exp, 3, r) == pytest.approx(1.0 / (math.pi**2 * r**4), rel=1e-7)
    assert green_kernel(exp, 3, r) == pytest.approx(1.0 / (2.0 * math.pi**2 * r**2), rel=1e-7)


def test_jump_sweep_is_flat_for_stable():
    sweep = sweep_jump_kernel(get_exponent("stable(1)"), 3, log_grid(1e-3, 1e-1, 5))
    assert sweep.ok
    assert sweep.spread <= 1.01
    assert sweep.notes["decreasing"]


def test_variance_gamma_jump_kernel_slope():
    curve = kernel_curve(get_exponent("vg"), KernelKind.JUMP_J, 3, log_grid(1e-3, 1e-2, 5))
    assert curve.is_decreasing
    assert log_slope(curve.r_grid, curve.values) == pytest.approx(-3.0, abs=0.05)
    assert len(curve.rows()) == 5


def test_green_comparison_rejects_unknown_form():
    r = np.array([0.01, 0.1])
    with pytest.raises(DomainError):
        green_comparison(get_exponent("example3"), 3, r, alpha2_form="other")


def test_green_function_needs_transience():
    with pytest.raises(PreconditionError):
        green_kernel(get_exponent("stable(1)"), 2, 0.1)
    with pytest.raises(DomainError):
        jump_kernel(get_exponent("stable(1)"), 3, 0.0)


def test_random_pairs_are_admissible():
    pairs = random_admissible_pairs(3, 0.1, n_pairs=50, seed=4)
    assert len(pairs) == 50
    for x, y in pairs:
        assert np.linalg.norm(x) >= 0.1
        assert np.linalg.norm(y) >= 0.1


def test_green_difference_constant_is_finite():
    report = check_green_diff(get_exponent("stable(1)"), 3, 0.1, n_pairs=10, seed=1)
    assert report["n_pairs"] == 10
    assert 0.0 < report["constant"] < 10.0
    with pytest.raises(DomainError):
        check_green_diff(get_exponent("stable(1)"), 3, 0.1, pair_list=[((0.01, 0, 0), (0.2, 0, 0))])


def test_mass_away_from_origin_for_stable():
    assert jump_mass_away(get_exponent("stable(1)"), 3, 1.0) == pytest.approx(4.0 / math.pi, rel=1e-6)
    assert jump_mass_away(get_exponent("drift"), 3) == 0.0


@pytest.mark.slow
def test_shell_mass_bound_is_finite():
    report = shell_mass_bound(get_exponent("vg"), 3, z_norms=(0.3, 0.6, 1.0))
    assert report["finite"]
    assert all(row["mass"] > 0 for row in report["rows"])
