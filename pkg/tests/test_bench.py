import math
from collections import Counter

import pytest

from experiments.bench import estimate_restart_rate, measure_scaling, restart_bound
from experiments.stats import polynomial_r2, total_variation, wilson_interval
from lrs.rng import SeededRng
from models.schemas import FieldParams
from utils.errors import ConfigurationError


def test_restart_bound_values():
    assert restart_bound(FieldParams(p=11, n=2)) == pytest.approx(4 / 11)
    assert restart_bound(FieldParams(p=65537, n=1000)) == pytest.approx(2000 / 65537)


def test_restart_rate_within_bound():
    report = estimate_restart_rate(FieldParams(p=11, n=2), 6_000, SeededRng(2, "rate"))
    assert report.passed
    assert report.ci_low <= report.rate <= report.ci_high
    assert report.rate <= report.bound + 3 * (report.ci_high - report.ci_low)


def test_restart_rate_independent_of_threads():
    params = FieldParams(p=53, n=13)
    serial = estimate_restart_rate(params, 12_000, SeededRng(4, "rate"), threads=1)
    threaded = estimate_restart_rate(params, 12_000, SeededRng(4, "rate"), threads=3)
    assert serial == threaded


def test_restart_rate_needs_standard_regime():
    with pytest.raises(ConfigurationError):
        estimate_restart_rate(FieldParams(p=11, n=8, relaxed=True), 10, SeededRng(0))


def test_scaling_is_linear():
    report = measure_scaling([16, 32, 64], 65537, 40, SeededRng(6, "bench"))
    assert report.per_attempt_bound_ok
    assert set(report.doubling_ratios) == {"16->32", "32->64"}
    assert all(1.7 <= ratio <= 2.3 for ratio in report.doubling_ratios.values())
    assert report.r2_linear > 0.99
    assert report.slope == pytest.approx(8, rel=0.1)
    assert all(point.wall_time_s is None for point in report.points)


def test_scaling_is_reproducible():
    first = measure_scaling([8, 16], 65537, 10, SeededRng(1, "bench"))
    second = measure_scaling([8, 16], 65537, 10, SeededRng(1, "bench"))
    assert first == second


def test_timing_is_opt_in():
    report = measure_scaling([8], 65537, 3, SeededRng(1, "bench"), timing=True)
    assert report.points[0].wall_time_s is not None


def test_scaling_input_validation():
    with pytest.raises(ConfigurationError, match="strictly increasing"):
        measure_scaling([32, 16], 65537, 5, SeededRng(0))


def test_wilson_interval():
    low, high = wilson_interval(0, 100)
    assert low == pytest.approx(0.0, abs=1e-12) and 0.0 < high < 0.05
    low, high = wilson_interval(50, 100)
    assert low < 0.5 < high


def test_polynomial_r2_exact_line():
    coeffs, r2 = polynomial_r2([1, 2, 3, 4], [3, 5, 7, 9], 1)
    assert r2 == pytest.approx(1.0)
    assert coeffs[0] == pytest.approx(2.0)


def test_restart_rate_single_coordinate():
    params = FieldParams(p=65537, n=1)
    report = estimate_restart_rate(params, 100_000, SeededRng(9, "rate-n1"))
    assert report.bound == pytest.approx(2 / 65537)
    assert report.ci_low <= report.bound <= report.ci_high
    # only step 4 can fail when n = 1, so the true rate is 1/p
    assert report.rate <= 3 * report.bound


def test_restart_rate_falls_as_p_grows():
    rates = [
        estimate_restart_rate(FieldParams(p=p, n=2), 6_000, SeededRng(10, f"trend-{p}")).rate
        for p in (11, 53, 401)
    ]
    assert rates[0] > rates[1] > rates[2]


def test_total_variation_point_masses():
    assert total_variation({1: 100}, {2: 100}) == pytest.approx(1.0)
    assert total_variation(Counter({1: 5}), Counter({1: 9})) == pytest.approx(0.0)
    assert total_variation({1: 50, 2: 50}, {1: 100}) == pytest.approx(0.5)


def test_total_variation_same_distribution():
    samples = 1_000_000
    first = Counter(SeededRng(12, "tv-a").below_many(4, samples))
    second = Counter(SeededRng(12, "tv-b").below_many(4, samples))
    assert total_variation(first, second) < 3 / math.sqrt(samples) * math.sqrt(4)


@pytest.mark.slow
def test_scaling_acceptance_size():
    report = measure_scaling([64, 128, 256], 65537, 1000, SeededRng(0, "bench"))
    assert report.per_attempt_bound_ok
    assert all(1.7 <= ratio <= 2.3 for ratio in report.doubling_ratios.values())
    assert report.r2_quadratic - report.r2_linear < 0.01
