import math
from dataclasses import replace

import numpy as np
import pytest

from bernstein import get_exponent
from errors import DomainError, PreconditionError
from montecarlo import (
    BinSpec,
    Moments,
    SimConfig,
    estimate_green_ball,
    exit_time_sweep,
    harmonic_modulus_check,
    laplace_identity_check,
    poisson_diff_check,
    sample_subordinator_increment,
    shell_scale,
    simulate_exit,
    simulate_exit_batches,
)


def small_cfg(**kw):
    base = dict(
        exponent_key="stable(1)", d=3, time_step=1e-3, master_seed=11, n_paths=300,
        ball_radius=0.1, start_points=((0.0, 0.0, 0.0),), block_size=100, workers=1,
    )
    base.update(kw)
    return SimConfig(**base)


def test_moments_merge_by_addition():
    a = Moments.of(np.array([[1.0], [2.0]]))
    b = Moments.of(np.array([[3.0]]))
    total = a + b
    assert total.n == 3
    assert total.mean[0] == pytest.approx(2.0)
    assert total.std_error[0] == pytest.approx(math.sqrt(1.0 / 3.0))
    assert np.isinf(Moments.of(np.array([[1.0]])).std_error[0])


def test_drift_increments_are_exact():
    rng = np.random.default_rng(0)
    assert sample_subordinator_increment(get_exponent("drift"), 0.25, rng) == 0.25
    with pytest.raises(DomainError):
        sample_subordinator_increment(get_exponent("drift"), 0.0, rng)


def test_gamma_increments_have_mean_dt():
    draws = sample_subordinator_increment(get_exponent("vg"), 0.5, np.random.default_rng(1), size=200_000)
    assert draws.shape == (200_000,)
    assert draws.mean() == pytest.approx(0.5, abs=0.01)
    assert np.all(draws >= 0)


@pytest.mark.parametrize("key", ["vg", "stable(1)", "geo(1)"])
def test_laplace_identity_within_standard_errors(key):
    report = laplace_identity_check(key, n=20_000, seed=3, workers=1)
    assert report["rows"]
    for row in report["rows"]:
        assert abs(row["z"]) < 5.0


def test_laplace_identity_is_reproducible():
    a = laplace_identity_check("vg", lams=(1.0,), times=(0.5,), n=5_000, seed=9, workers=1)
    b = laplace_identity_check("vg", lams=(1.0,), times=(0.5,), n=5_000, seed=9, workers=1)
    assert a["rows"] == b["rows"]


def test_bin_volumes_fill_the_ball():
    bins = BinSpec.ball(3, 0.5, n_radial=4, n_cos=4)
    assert bins.n_bins == 16
    assert bins.volumes().sum() == pytest.approx(4.0 * math.pi * 0.5**3 / 3.0, rel=1e-12)


def test_bin_locate():
    bins = BinSpec.ball(3, 1.0, n_radial=4, n_cos=4)
    idx = bins.locate(np.array([[0.1, 0.0, 0.0], [-0.6, 0.0, 0.0], [2.0, 0.0, 0.0]]))
    assert idx.tolist() == [3, 2 * 4 + 0, -1]


def test_sampled_points_land_in_their_bin():
    bins = BinSpec.shell(3, 1.0, 2.0, n_radial=3, n_cos=4)
    pts = bins.sample_points(20, np.random.default_rng(5))
    for b in range(bins.n_bins):
        assert np.all(bins.locate(pts[b]) == b)


@pytest.mark.parametrize("edges", [(0.5,), (0.5, 0.2), (-1.0, 1.0)])
def test_bin_edges_are_validated(edges):
    with pytest.raises(DomainError):
        BinSpec(3, edges)


def test_sim_config_validation():
    with pytest.raises(PreconditionError):
        small_cfg(start_points=((0.2, 0.0, 0.0),))
    with pytest.raises(PreconditionError):
        small_cfg(start_points=((0.0, 0.0),))
    with pytest.raises(PreconditionError):
        small_cfg(time_step=0.0)
    assert small_cfg().to_dict()["paths"] == 300


def test_common_random_numbers_for_repeated_start():
    cfg = small_cfg(start_points=((0.0, 0.0, 0.0), (0.0, 0.0, 0.0)))
    a, b = simulate_exit_batches(cfg).batches
    np.testing.assert_array_equal(a.exit_time, b.exit_time)
    np.testing.assert_array_equal(a.exit_position, b.exit_position)


def test_exit_positions_leave_the_ball():
    records = simulate_exit(small_cfg())
    assert len(records) == 300
    exited = [r for r in records if not (r.censored or r.killed)]
    assert exited
    for r in exited:
        assert math.hypot(*r.exit_position) >= 0.1
        assert r.exit_time > 0


def test_total_occupation_equals_mean_exit_time():
    bins = BinSpec.ball(3, 0.1, n_radial=4, n_cos=2)
    batch = simulate_exit_batches(small_cfg(), bins=bins).batches[0]
    assert float(batch.occupation.mean.sum()) == pytest.approx(float(batch.exit_time.mean()), rel=1e-9)


def test_green_estimate_needs_transience():
    cfg = small_cfg(d=2, start_points=((0.0, 0.0),))
    with pytest.raises(PreconditionError):
        estimate_green_ball(cfg, BinSpec.ball(2, 0.1))


def test_sweeps_check_the_exponent_key():
    with pytest.raises(PreconditionError):
        exit_time_sweep(get_exponent("vg"), 3, [0.1], small_cfg())


def test_harmonic_grid_must_sit_near_the_origin():
    with pytest.raises(PreconditionError):
        harmonic_modulus_check(get_exponent("stable(1)"), 3, 0.1, small_cfg(), grid=[(0.05, 0.0, 0.0)])


def test_poisson_pairs_must_sit_near_the_origin():
    with pytest.raises(PreconditionError):
        poisson_diff_check(get_exponent("stable(1)"), 3, 0.1, small_cfg(), x_pairs=[((0.0, 0.0, 0.0), (0.05, 0.0, 0.0))])


def test_shell_scale_for_stable():
    assert shell_scale(get_exponent("stable(1)"), 0.3) == pytest.approx(0.5)
    assert shell_scale(get_exponent("drift"), 0.3) == pytest.approx(1.0)


@pytest.mark.slow
def test_results_do_not_depend_on_worker_count():
    cfg = small_cfg(n_paths=400)
    one = simulate_exit_batches(cfg).batches[0]
    two = simulate_exit_batches(replace(cfg, workers=2)).batches[0]
    np.testing.assert_array_equal(one.exit_time, two.exit_time)
    np.testing.assert_array_equal(np.nan_to_num(one.exit_position), np.nan_to_num(two.exit_position))


@pytest.mark.slow
def test_brownian_exit_time_scale():
    cfg = small_cfg(exponent_key="drift", n_paths=2000)
    sweep = exit_time_sweep(get_exponent("drift"), 3, [0.1, 0.2], cfg)
    # E τ = r²/6 for the generator Δ in three dimensions, plus overshoot
    for ratio in sweep.ratios:
        assert 0.9 / 6.0 <= ratio <= 0.3


@pytest.mark.slow
def test_compound_poisson_sampler_reproduces_the_transform():
    report = laplace_identity_check("example3", lams=(1.0, 4.0), times=(0.5,), n=20_000, seed=2, workers=1)
    for row in report["rows"]:
        assert abs(row["z"]) < 5.0
