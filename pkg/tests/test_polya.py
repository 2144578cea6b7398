# Copyright 2026 The ctqw Authors.
# MIT License (see LICENSE.md)

import numpy as np
import pytest
import scipy.special

from ctqw.graph import cycle, path, star
from ctqw.polya import (
    GROWTH_MODELS,
    classify_walk,
    divergence_diagnostic,
    estimate_decay_exponent,
    expected_increments,
    first_measurement_sweep,
    monte_carlo_expectation,
    monte_carlo_profile,
    partial_polya,
    partial_polya_estimate,
    quadrature_expectation,
    table1,
)
from ctqw.propagator import (
    ENVELOPE_PRESETS,
    ConstantModel,
    EnvelopeModel,
    LatticeBesselModel,
    LineBesselModel,
    spectral_model,
)
from ctqw.scheduler import JitteredLaw, PeriodicLaw, PoissonLaw, generate
from ctqw.utils import InsufficientDataError, ResourceLimitError, load_csv


def test_certain_return():
    assert partial_polya(ConstantModel(1.0), [1.0]) == 1.0


def test_no_measurements():
    assert partial_polya(LineBesselModel(), []) == 0.0
    estimate = monte_carlo_expectation(LineBesselModel(), PoissonLaw(1.0), 0, 1000, seed=0)
    assert estimate.value == 0.0


def test_lattice_periodic_product():
    schedule = generate(PeriodicLaw(10.0, 10.0), 3)
    p = scipy.special.j0(2 * schedule.times) ** 4
    expected = 1 - np.prod(1 - p)
    assert partial_polya(LatticeBesselModel(2), schedule) == pytest.approx(
        expected, abs=1e-14
    )


def test_line_zeros_are_never_seen():
    times = scipy.special.jn_zeros(0, 20) / 2
    assert partial_polya(LineBesselModel(), times) == 0.0


def test_cycle4_resonant_schedule():
    model = spectral_model(cycle(4), method='dense')
    schedule = generate(PeriodicLaw(np.pi, np.pi / 2), 100)
    assert partial_polya(model, schedule) == 0.0


@pytest.mark.parametrize('spec', [cycle(5), path(4), star(6)])
def test_finite_graphs_are_recurrent(spec):
    schedule = generate(PoissonLaw(1.0), 10**4, seed=11)
    assert partial_polya(spectral_model(spec), schedule) >= 0.999


def test_partial_polya_is_monotone():
    model = LatticeBesselModel(3)
    schedule = generate(PoissonLaw(1.0), 200, seed=2)
    values = [partial_polya(model, schedule.times[:k]) for k in range(1, 201, 10)]
    assert np.all(np.diff(values) >= 0)
    assert all(0 <= v <= 1 for v in values)


def test_partial_polya_estimate_records_schedule():
    schedule = generate(PoissonLaw(1.0), 5, seed=8)
    estimate = partial_polya_estimate(LineBesselModel(), schedule)
    descriptor = estimate.to_json()
    assert descriptor['seed'] == 8
    assert descriptor['law'] == {'kind': 'poisson', 'rate': 1.0}
    assert descriptor['model'] == {'kind': 'line'}


@pytest.mark.parametrize('n_points', [1, 2, 3, 4])
def test_constant_model_quadrature(n_points):
    estimate = quadrature_expectation(ConstantModel(0.2), 1.0, n_points)
    assert estimate.law == PoissonLaw(1.0)
    assert estimate.value == pytest.approx(1 - 0.8**n_points, abs=1e-12)
    assert sum(estimate.increments) == pytest.approx(estimate.value, abs=1e-12)


def test_constant_model_monte_carlo():
    estimate = monte_carlo_expectation(ConstantModel(0.2), PoissonLaw(1.0), 3, 1000, seed=0)
    assert estimate.value == pytest.approx(1 - 0.8**3, abs=1e-12)
    assert estimate.std_error == pytest.approx(0.0, abs=1e-7)


def test_monte_carlo_is_independent_of_threads():
    model = LatticeBesselModel(3)
    kwargs = dict(model=model, law=PoissonLaw(1.0), n_points=3, trials=150_000, seed=5)
    one = monte_carlo_expectation(threads=1, **kwargs)
    three = monte_carlo_expectation(threads=3, **kwargs)
    assert one.value == three.value
    assert one.std_error == three.std_error


def test_monte_carlo_reproducible_and_seeded():
    kwargs = dict(model=LineBesselModel(), law=PoissonLaw(1.0), n_points=3, trials=5000)
    assert (
        monte_carlo_expectation(seed=1, **kwargs).value
        == monte_carlo_expectation(seed=1, **kwargs).value
    )
    assert (
        monte_carlo_expectation(seed=1, **kwargs).value
        != monte_carlo_expectation(seed=2, **kwargs).value
    )


def test_monte_carlo_profile_increments():
    profile = monte_carlo_profile(LatticeBesselModel(2), PoissonLaw(1.0), 4, 20_000, seed=3)
    np.testing.assert_allclose(np.cumsum(profile.increments), profile.values, atol=1e-12)
    assert np.all(np.diff(profile.values) >= 0)


def test_monte_carlo_validation():
    with pytest.raises(ValueError):
        monte_carlo_expectation(LineBesselModel(), PoissonLaw(1.0), 3, 10, seed=0)
    with pytest.raises(ValueError):
        monte_carlo_expectation(LineBesselModel(), PoissonLaw(1.0), 3, 1000, seed=None)
    with pytest.raises(ResourceLimitError):
        monte_carlo_expectation(LineBesselModel(), PoissonLaw(1.0), 3, 10**10, seed=0)


def test_quadrature_validation():
    with pytest.raises(ValueError):
        quadrature_expectation(LineBesselModel(), 1.0, 5)
    with pytest.raises(ValueError):
        quadrature_expectation(LineBesselModel(), 1.0, 2, nodes_per_dim=8)
    with pytest.raises(ResourceLimitError):
        quadrature_expectation(LineBesselModel(), 1.0, 4, nodes_per_dim=128)


def test_quadrature_rate_rescales_time():
    # lambda = 2 on the line equals lambda = 1 on a walk twice as slow
    fast = quadrature_expectation(LineBesselModel(), 2.0, 2)
    t = expected_increments(
        _Slowed(LineBesselModel(), 0.5), 1.0, 2, 96
    )
    assert fast.value == pytest.approx(sum(t), abs=1e-12)


class _Slowed:
    def __init__(self, model, factor):
        self.model, self.factor = model, factor

    def p0(self, t):
        return self.model.p0(self.factor * np.asarray(t))


def test_methods_agree_for_lattice():
    model = LatticeBesselModel(3)
    mc = monte_carlo_expectation(model, PoissonLaw(1.0), 3, 200_000, seed=21)
    quad = quadrature_expectation(model, 1.0, 3)
    assert abs(mc.value - quad.value) <= 4 * mc.std_error + quad.error_estimate


@pytest.mark.slow
@pytest.mark.parametrize('d,expected', [(2, 0.354), (3, 0.2968), (4, 0.26374)])
def test_lattice_monte_carlo_expectation(d, expected):
    estimate = monte_carlo_expectation(
        LatticeBesselModel(d), PoissonLaw(1.0), 3, 10**6, seed=42, threads=4
    )
    assert abs(estimate.value - expected) <= 3 * estimate.std_error + 5e-4


@pytest.mark.slow
def test_lattice_quadrature_expectation():
    estimate = quadrature_expectation(LatticeBesselModel(4), 1.0, 3)
    assert estimate.value == pytest.approx(0.26374, abs=5e-4)


@pytest.mark.slow
@pytest.mark.parametrize('d,expected', [(2, 0.002), (3, 0.0003), (4, 0.00007)])
def test_fourth_increment(d, expected):
    estimate = quadrature_expectation(LatticeBesselModel(d), 1.0, 4)
    assert expected / 2 <= estimate.increments[3] <= 2 * expected
    assert estimate.increments[3] < estimate.increments[2]


def test_table1_rows():
    rows = table1(dims=[3], trials=20_000, seed=42)
    (row,) = rows
    assert row['d'] == 3
    assert 0.28 < row['expected_p3_quadrature'] < 0.31
    assert abs(row['expected_p3_monte_carlo'] - row['expected_p3_quadrature']) < 0.02
    assert row['increment_p4_quadrature'] < 1e-3


def test_line_sum_grows_logarithmically():
    diagnostic = divergence_diagnostic(LineBesselModel(), PoissonLaw(1.0), 10**5, seed=0)
    fit = diagnostic.growth_fit
    assert fit.model == 'logarithmic'
    assert diagnostic.verdict == 'divergent'
    assert 0.12 <= fit.coefficient <= 0.20
    # E[p0] ~ 1 / (2 pi t) under Poisson sampling
    assert fit.coefficient == pytest.approx(1 / (2 * np.pi), abs=0.03)


def test_lattice_sum_converges():
    diagnostic = divergence_diagnostic(LatticeBesselModel(3), PoissonLaw(1.0), 10**5, seed=0)
    assert diagnostic.growth_fit.model == 'converging'
    assert diagnostic.verdict == 'convergent'
    assert diagnostic.tail_bound < 1e-3


def test_cycle_sum_grows_linearly():
    diagnostic = divergence_diagnostic(spectral_model(cycle(5)), PoissonLaw(1.0), 10**4, seed=0)
    assert diagnostic.growth_fit.model == 'linear'
    assert diagnostic.verdict == 'divergent'


def test_resonant_line_schedule_is_transient():
    law = PeriodicLaw(np.pi / 2, 3 * np.pi / 8)
    diagnostic = divergence_diagnostic(LineBesselModel(), law, 10**5)
    assert diagnostic.tail_bound < 1e-4
    assert diagnostic.verdict == 'convergent'


def test_jitter_restores_recurrence():
    law = JitteredLaw(np.pi / 2, 3 * np.pi / 8, 0.1)
    diagnostic = divergence_diagnostic(LineBesselModel(), law, 10**5, seed=0)
    assert diagnostic.growth_fit.model == 'logarithmic'
    assert diagnostic.growth_fit.r_squared > 0.99


def test_diagnostic_outputs(tmp_path):
    diagnostic = divergence_diagnostic(LineBesselModel(), PoissonLaw(1.0), 1000, seed=0)
    filename = tmp_path / 'sums.csv'
    diagnostic.save_csv(filename)
    header, (n, t, s) = load_csv(filename)
    assert header == ['n', 't_n', 'S_n']
    np.testing.assert_array_equal(n, np.arange(1, 1001))
    np.testing.assert_array_equal(s, diagnostic.partial_sums)
    summary = diagnostic.to_json()
    assert summary['growth_fit']['model'] in GROWTH_MODELS
    assert summary['max_points'] == 1000


def test_diagnostic_needs_points():
    with pytest.raises(ValueError):
        divergence_diagnostic(LineBesselModel(), PoissonLaw(1.0), 100, seed=0)


def test_line_decay_exponent():
    verdict = estimate_decay_exponent(LineBesselModel())
    assert 0.95 <= verdict.alpha_estimate <= 1.05
    assert verdict.verdict in ('recurrent', 'boundary')
    low, high = verdict.confidence_interval
    assert low <= verdict.alpha_estimate <= high


@pytest.mark.parametrize('d', [2, 3, 4])
def test_lattice_decay_exponent(d):
    verdict = estimate_decay_exponent(LatticeBesselModel(d))
    assert d - 0.1 <= verdict.alpha_estimate <= d + 0.1
    assert verdict.verdict == 'transient'


def test_envelope_decay_exponents():
    honeycomb = estimate_decay_exponent(EnvelopeModel(alpha=2.0))
    assert 1.98 <= honeycomb.alpha_estimate <= 2.02
    assert honeycomb.verdict == 'transient'
    for name in ('spidernet', 'hermite'):
        assert estimate_decay_exponent(ENVELOPE_PRESETS[name]).verdict == 'transient'


def test_decay_exponent_needs_maxima():
    with pytest.raises(InsufficientDataError):
        estimate_decay_exponent(ConstantModel(1.0))
    with pytest.raises(ValueError):
        estimate_decay_exponent(LineBesselModel(), t_min=20.0, t_max=100.0)


def test_first_measurement_sweep():
    firsts = np.array([np.pi / 8, np.pi / 4, 3 * np.pi / 8])
    values = first_measurement_sweep(LineBesselModel(), np.pi / 2, firsts, 1000)
    assert values.shape == (3,)
    assert values[2] == pytest.approx(
        partial_polya(LineBesselModel(), generate(PeriodicLaw(np.pi / 2, firsts[2]), 1000))
    )
    assert values[2] < values[0]


def test_classify_walk():
    line = classify_walk(LineBesselModel(), PoissonLaw(1.0), 10**5, seed=0)
    assert line.verdict == 'recurrent'
    lattice = classify_walk(LatticeBesselModel(3), PoissonLaw(1.0), 10**5, seed=0)
    assert lattice.verdict == 'transient'
    assert lattice.to_json()['divergence']['verdict'] == 'convergent'
