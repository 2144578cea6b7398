# Copyright 2026 The ctqw Authors.
# MIT License (see LICENSE.md)

'''
Measurement-time laws: Poisson sampling, periodic sampling and periodic
sampling with i.i.d. uniform timing error.

Random schedules are drawn from `utils.make_rng` (numpy Philox streams keyed
through SeedSequence). Poisson gaps use the inverse CDF -ln(u) / lambda with
u uniform in (0, 1].
'''

import dataclasses
import numpy as np
import scipy.stats

from .utils import RNG_ID, make_rng, save_csv

_CHUNK_ELEMENTS = 2**22


@dataclasses.dataclass(frozen=True)
class PoissonLaw:
    rate: float
    kind = 'poisson'
    deterministic = False

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError(f'`rate` must be positive; received: {self.rate}')

    def to_json(self):
        return {'kind': self.kind, 'rate': self.rate}


@dataclasses.dataclass(frozen=True)
class PeriodicLaw:
    period: float
    first: float
    kind = 'periodic'
    deterministic = True

    def __post_init__(self):
        if not self.period > 0:
            raise ValueError(f'`period` must be positive; received: {self.period}')
        if not self.first > 0:
            raise ValueError(f'`first` must be positive; received: {self.first}')

    def to_json(self):
        return {'kind': self.kind, 'period': self.period, 'first': self.first}


@dataclasses.dataclass(frozen=True)
class JitteredLaw:
    '''
    Periodic grid first + (i - 1) * period with an independent
    Uniform(-delta, delta) error on every measurement.
    '''

    period: float
    first: float
    delta: float
    jitter: str = 'uniform'
    kind = 'jittered'
    deterministic = False

    def __post_init__(self):
        if not self.period > 0:
            raise ValueError(f'`period` must be positive; received: {self.period}')
        if not 0 < self.delta < self.period / 2:
            raise ValueError(
                '`delta` must be in (0, period / 2); '
                f'received: {self.delta} with period {self.period}'
            )
        if not self.first > self.delta:
            raise ValueError(
                '`first` must exceed `delta` so that all times stay positive; '
                f'received: {self.first}'
            )
        if self.jitter != 'uniform':
            raise ValueError(f'Unsupported jitter distribution: {self.jitter}')

    def to_json(self):
        return {
            'kind': self.kind,
            'period': self.period,
            'first': self.first,
            'delta': self.delta,
            'jitter': self.jitter,
        }


def law_from_json(obj):
    kind = obj.get('kind')
    if kind == 'poisson':
        return PoissonLaw(obj['rate'])
    if kind == 'periodic':
        return PeriodicLaw(obj['period'], obj['first'])
    if kind == 'jittered':
        return JitteredLaw(
            obj['period'], obj['first'], obj['delta'], obj.get('jitter', 'uniform')
        )
    raise ValueError(f'Unknown schedule law: {kind}')


def sample_times(law, trials, count, rng=None):
    '''
    Draws `trials` independent schedules of `count` measurement times.

    Parameters
    ----------
    law: PoissonLaw, PeriodicLaw or JitteredLaw
        Generating law.
    trials: int
        Number of independent realizations (rows).
    count: int
        Measurements per realization (columns).
    rng: numpy.random.Generator or None
        Required for random laws.

    Returns
    -------
    ndarray
        Array of shape (trials, count); every row is increasing.
    '''

    shape = (trials, count)

    if isinstance(law, PoissonLaw):
        u = 1.0 - rng.random(shape)
        return np.cumsum(-np.log(u) / law.rate, axis=1)

    grid = law.first + law.period * np.arange(count, dtype=np.float64)
    grid = np.broadcast_to(grid, shape)

    if isinstance(law, PeriodicLaw):
        return grid.copy()

    return grid + rng.uniform(-law.delta, law.delta, size=shape)


@dataclasses.dataclass(frozen=True, eq=False)
class MeasurementSchedule:
    '''Strictly increasing positive measurement times and their law.'''

    times: np.ndarray
    law: object
    seed: int = None
    rng_id: str = None

    def __post_init__(self):
        times = np.array(self.times, dtype=np.float64)
        if times.ndim != 1:
            raise ValueError('Measurement times must be one-dimensional')
        if times.size and not times[0] > 0:
            raise ValueError(f'Measurement times must be positive; t1 = {times[0]}')
        if np.any(np.diff(times) <= 0):
            raise ValueError('Measurement times must be strictly increasing')
        times.flags.writeable = False
        object.__setattr__(self, 'times', times)

    def __len__(self):
        return len(self.times)

    def to_json(self):
        return {
            'law': self.law.to_json(),
            'seed': self.seed,
            'rng_id': self.rng_id,
            'times': self.times,
        }


def generate(law, count, seed=None):
    '''
    Generates one measurement schedule.

    Parameters
    ----------
    law: PoissonLaw, PeriodicLaw or JitteredLaw
        Generating law.
    count: int
        Number of measurements (>= 1).
    seed: int or None
        64-bit seed; required for random laws, ignored for periodic ones.

    Returns
    -------
    MeasurementSchedule
        Bit-identical for identical (law, count, seed).
    '''

    if int(count) != count or count < 1:
        raise ValueError(f'`count` must be a positive integer; received: {count}')

    if law.deterministic:
        return MeasurementSchedule(sample_times(law, 1, count)[0], law)

    if seed is None:
        raise ValueError(f'A seed is required for {law.kind} schedules')

    times = sample_times(law, 1, count, make_rng(seed))[0]
    return MeasurementSchedule(times, law, seed=int(seed), rng_id=RNG_ID)


def save_schedule_csv(filename, schedule):
    '''CSV with columns (index, t_i); the index starts at 1.'''
    save_csv(
        filename,
        ['index', 't_i'],
        [np.arange(1, len(schedule) + 1), schedule.times],
    )


def _kth_arrival_times(rate, k, samples, seed):
    # rows are generated in fixed chunks so the result only depends on
    # (rate, k, samples, seed)
    law = PoissonLaw(rate)
    rows = max(1, _CHUNK_ELEMENTS // k)
    result = []
    for index, start in enumerate(range(0, samples, rows)):
        block = min(rows, samples - start)
        times = sample_times(law, block, k, make_rng(seed, index))
        result.append(times[:, -1])
    return np.concatenate(result)


@dataclasses.dataclass(frozen=True)
class ErlangReport:
    rate: float
    k: int
    samples: int
    ks_statistic: float
    p_value: float
    critical_value: float
    mean_ratio: float
    ratio_std_error: float

    @property
    def passed(self):
        '''KS statistic below the 1% critical value.'''
        return self.ks_statistic < self.critical_value


def erlang_check(rate, k, samples, seed):
    '''
    Compares the k-th Poisson arrival time with the Erlang(k, rate)
    distribution.

    Parameters
    ----------
    rate: float
        Poisson intensity lambda.
    k: int
        Arrival index (>= 1).
    samples: int
        Independent schedule realizations (>= 1000).
    seed: int
        Base seed.

    Returns
    -------
    ErlangReport
        Kolmogorov-Smirnov statistic against the Erlang CDF, its p-value, the
        asymptotic 1% critical value 1.63 / sqrt(samples) and the mean of
        t_k / k (which tends to 1 / rate) with its standard error.
    '''

    if int(k) != k or k < 1:
        raise ValueError(f'`k` must be a positive integer; received: {k}')
    if samples < 1000:
        raise ValueError(f'`samples` must be at least 1000; received: {samples}')

    tk = _kth_arrival_times(PoissonLaw(rate).rate, int(k), int(samples), seed)
    erlang = scipy.stats.gamma(a=k, scale=1.0 / rate)
    statistic, p_value = scipy.stats.kstest(tk, erlang.cdf)
    ratio = tk / k

    return ErlangReport(
        rate=float(rate),
        k=int(k),
        samples=int(samples),
        ks_statistic=float(statistic),
        p_value=float(p_value),
        critical_value=1.63 / np.sqrt(samples),
        mean_ratio=float(ratio.mean()),
        ratio_std_error=float(ratio.std(ddof=1) / np.sqrt(samples)),
    )


def clt_check(rate, k, samples, seed):
    '''
    KS statistic of the standardized k-th arrival (t_k - k / rate) * rate /
    sqrt(k) against the standard normal; shrinks as k grows.
    '''
    tk = _kth_arrival_times(PoissonLaw(rate).rate, int(k), int(samples), seed)
    z = (tk - k / rate) * rate / np.sqrt(k)
    statistic, p_value = scipy.stats.kstest(z, 'norm')
    return float(statistic), float(p_value)


@dataclasses.dataclass(frozen=True)
class PoissonCountReport:
    rate: float
    horizon: float
    trials: int
    mean: float
    variance: float
    expected: float

    @property
    def std_error(self):
        return float(np.sqrt(self.expected / self.trials))


def poisson_count_check(rate, horizon, trials, seed):
    '''
    Counts the measurements falling in [0, horizon] over independent
    realizations; mean and variance both tend to rate * horizon.
    '''
    law = PoissonLaw(rate)
    expected = law.rate * horizon
    count = int(np.ceil(expected + 10 * np.sqrt(expected) + 10))

    times = sample_times(law, trials, count, make_rng(seed))
    if np.any(times[:, -1] <= horizon):
        raise RuntimeError(
            'Sampled schedules do not cover the horizon; increase `count`'
        )
    counts = np.count_nonzero(times <= horizon, axis=1)

    return PoissonCountReport(
        rate=float(rate),
        horizon=float(horizon),
        trials=int(trials),
        mean=float(counts.mean()),
        variance=float(counts.var(ddof=1)),
        expected=float(expected),
    )
