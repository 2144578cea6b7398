# Copyright 2026 The ctqw Authors.
# MIT License (see LICENSE.md)

import numpy as np
import pytest

from ctqw.scheduler import (
    JitteredLaw,
    MeasurementSchedule,
    PeriodicLaw,
    PoissonLaw,
    clt_check,
    erlang_check,
    generate,
    law_from_json,
    poisson_count_check,
    save_schedule_csv,
)
from ctqw.utils import RNG_ID, load_csv


def test_periodic_schedule():
    schedule = generate(PeriodicLaw(0.5, 0.5), 4)
    np.testing.assert_array_equal(schedule.times, [0.5, 1.0, 1.5, 2.0])
    assert schedule.seed is None


def test_poisson_gaps():
    schedule = generate(PoissonLaw(1.0), 10**5, seed=7)
    gaps = np.diff(schedule.times, prepend=0.0)
    assert 0.99 <= gaps.mean() <= 1.01
    assert np.all(gaps > 0)
    assert schedule.rng_id == RNG_ID


def test_poisson_rate_scales_gaps():
    schedule = generate(PoissonLaw(4.0), 10**5, seed=3)
    assert schedule.times[-1] / 10**5 == pytest.approx(0.25, rel=0.02)


def test_jittered_schedule_stays_near_grid():
    law = JitteredLaw(np.pi / 2, 3 * np.pi / 8, 0.01)
    schedule = generate(law, 100, seed=1)
    grid = 3 * np.pi / 8 + np.pi / 2 * np.arange(100)
    assert np.all(np.abs(schedule.times - grid) <= 0.01)
    assert np.any(schedule.times != grid)


def test_reproducible():
    for law in (PoissonLaw(2.0), JitteredLaw(1.0, 1.0, 0.3)):
        a = generate(law, 1000, seed=12345)
        b = generate(law, 1000, seed=12345)
        c = generate(law, 1000, seed=12346)
        np.testing.assert_array_equal(a.times, b.times)
        assert np.any(a.times != c.times)


def test_random_laws_need_a_seed():
    with pytest.raises(ValueError):
        generate(PoissonLaw(1.0), 10)


@pytest.mark.parametrize(
    'make',
    [
        lambda: PoissonLaw(0.0),
        lambda: PeriodicLaw(-1.0, 1.0),
        lambda: PeriodicLaw(1.0, 0.0),
        lambda: JitteredLaw(1.0, 1.0, 0.6),
        lambda: JitteredLaw(1.0, 0.1, 0.2),
        lambda: JitteredLaw(1.0, 1.0, 0.1, jitter='normal'),
    ],
)
def test_invalid_laws(make):
    with pytest.raises(ValueError):
        make()


def test_invalid_count():
    with pytest.raises(ValueError):
        generate(PeriodicLaw(1.0, 1.0), 0)


def test_schedule_validation():
    with pytest.raises(ValueError):
        MeasurementSchedule([1.0, 1.0], PeriodicLaw(1.0, 1.0))
    with pytest.raises(ValueError):
        MeasurementSchedule([0.0, 1.0], PeriodicLaw(1.0, 1.0))


def test_law_descriptors():
    for law in (PoissonLaw(1.5), PeriodicLaw(2.0, 0.5), JitteredLaw(2.0, 1.0, 0.5)):
        assert law_from_json(law.to_json()) == law


def test_schedule_csv(tmp_path):
    schedule = generate(PoissonLaw(1.0), 50, seed=9)
    filename = tmp_path / 'schedule.csv'
    save_schedule_csv(filename, schedule)
    header, (index, times) = load_csv(filename)
    assert header == ['index', 't_i']
    np.testing.assert_array_equal(index, np.arange(1, 51))
    np.testing.assert_array_equal(times, schedule.times)


def test_first_arrival_is_exponential():
    report = erlang_check(1.0, 1, 10**5, seed=0)
    assert report.ks_statistic < 0.006
    assert report.passed


def test_erlang_k10():
    report = erlang_check(1.0, 10, 10**5, seed=2)
    assert report.passed


def test_kth_arrival_mean_within_two_standard_errors():
    # a 2 SE band holds for ~95% of seeds; require three of four
    reports = [erlang_check(1.0, 1000, 2000, seed=s) for s in range(4)]
    inside = [
        abs(r.mean_ratio - 1.0) <= 2 * r.ratio_std_error for r in reports
    ]
    assert sum(inside) >= 3


def test_erlang_k50():
    report = erlang_check(2.0, 50, 10**4, seed=1)
    assert 0.49 <= report.mean_ratio <= 0.51
    assert report.passed


def test_kth_arrival_approaches_mean_gap():
    deviations = [
        abs(erlang_check(1.0, k, 2000, seed=k).mean_ratio - 1.0)
        for k in (10, 100, 1000)
    ]
    assert deviations[-1] < 0.01
    assert deviations[-1] < deviations[0] + 0.01


def test_erlang_check_needs_samples():
    with pytest.raises(ValueError):
        erlang_check(1.0, 3, 100, seed=0)


def test_clt():
    small, _ = clt_check(1.0, 2, 20_000, seed=4)
    large, _ = clt_check(1.0, 400, 20_000, seed=4)
    assert large < small
    assert large < 0.02


def test_poisson_counts():
    report = poisson_count_check(2.0, 50.0, 20_000, seed=5)
    assert report.mean == pytest.approx(100.0, abs=5 * report.std_error)
    assert report.variance == pytest.approx(100.0, rel=0.05)
