# Copyright 2026 The ctqw Authors.
# MIT License (see LICENSE.md)

'''
Polya number estimators.

The probability of never finding the walker at the origin in the
measurements t_1 < t_2 < ... is prod_i (1 - p0(t_i)); the Polya number is its
complement. Products are accumulated as sums of log1p(-p0) and declared zero
below exp(-745). Return probabilities under 1e-20 (the square of the
amplitude round-off for t up to ~1e6) count as exact zeros and those within
machine epsilon of 1 as exact ones.
'''

import concurrent.futures
import dataclasses
import math
import numpy as np
import tqdm
import tqdm.utils

from .propagator import LatticeBesselModel
from .scheduler import (
    MeasurementSchedule,
    PeriodicLaw,
    PoissonLaw,
    generate,
    sample_times,
)
from .utils import (
    RNG_ID,
    InsufficientDataError,
    ResourceLimitError,
    fit_linear_model,
    make_rng,
    save_csv,
)

MAX_QUADRATURE_EVALUATIONS = 10**8
MAX_TRIALS = 10**9
MONTE_CARLO_BLOCK = 2**16

_NEGLIGIBLE = 1e-20
_CHUNK_ELEMENTS = 2**22
_LOG_UNDERFLOW = -745.0


def _snap(p):
    p = np.asarray(p, dtype=np.float64)
    p = np.where(p <= _NEGLIGIBLE, 0.0, p)
    return np.where(p >= 1.0 - np.finfo(np.float64).eps, 1.0, p)


def _survival_log(p):
    with np.errstate(divide='ignore'):
        return np.log1p(-_snap(p))


def _polya_from_log(log_survival):
    log_survival = np.asarray(log_survival)
    return np.where(
        log_survival < _LOG_UNDERFLOW, 1.0, -np.expm1(log_survival)
    )


@dataclasses.dataclass(frozen=True)
class PolyaEstimate:
    '''
    Estimated (truncated) Polya number.

    `std_error` is the Monte Carlo standard error; `error_estimate` the
    quadrature refinement difference. `increments` holds the contributions
    of the individual measurements, which sum to `value`.
    '''

    value: float
    method: str
    n_points: int
    trials: int = None
    std_error: float = 0.0
    law: object = None
    model: object = None
    seed: int = None
    rng_id: str = None
    error_estimate: float = None
    nodes_per_dim: int = None
    increments: tuple = None

    def to_json(self):
        return {
            'model': None if self.model is None else self.model.to_json(),
            'law': None if self.law is None else self.law.to_json(),
            'method': self.method,
            'n_points': self.n_points,
            'trials': self.trials,
            'value': self.value,
            'std_error': self.std_error,
            'error_estimate': self.error_estimate,
            'nodes_per_dim': self.nodes_per_dim,
            'increments': self.increments,
            'seed': self.seed,
            'rng_id': self.rng_id,
        }


def partial_polya(model, schedule):
    '''
    1 - prod_i (1 - p0(t_i)) for a finite schedule.

    Parameters
    ----------
    model: return-probability model
        Anything with a vectorized `p0(t)`.
    schedule: MeasurementSchedule or array_like
        Measurement times.

    Returns
    -------
    float
        Probability in [0, 1] of finding the walker at least once.
    '''

    times = schedule.times if isinstance(schedule, MeasurementSchedule) else schedule
    times = np.asarray(times, dtype=np.float64)
    if times.size == 0:
        return 0.0

    log_survival = math.fsum(_survival_log(model.p0(times)))
    return float(np.clip(_polya_from_log(log_survival), 0.0, 1.0))


def partial_polya_estimate(model, schedule):
    value = partial_polya(model, schedule)
    return PolyaEstimate(
        value=value,
        method='partial_product',
        n_points=len(schedule),
        law=schedule.law,
        model=model,
        seed=schedule.seed,
        rng_id=schedule.rng_id,
    )


@dataclasses.dataclass(frozen=True)
class MonteCarloProfile:
    '''
    E[P_k] for k = 1..n_points from one set of trials, with standard errors,
    and the increments E[P_k] - E[P_{k-1}] with their own (paired) errors.
    '''

    values: np.ndarray
    std_errors: np.ndarray
    increments: np.ndarray
    increment_std_errors: np.ndarray
    trials: int
    seed: int


def _monte_carlo_block(model, law, n_points, seed, block, rows):
    times = sample_times(law, rows, n_points, make_rng(seed, block))
    log_survival = np.cumsum(_survival_log(model.p0(times)), axis=1)
    polya = _polya_from_log(log_survival)
    increments = np.diff(polya, axis=1, prepend=0.0)
    return (
        polya.sum(axis=0),
        (polya**2).sum(axis=0),
        increments.sum(axis=0),
        (increments**2).sum(axis=0),
    )


def _mean_and_error(sums, squares, trials):
    mean = np.array([math.fsum(s) for s in zip(*sums)]) / trials
    second = np.array([math.fsum(s) for s in zip(*squares)]) / trials
    variance = np.clip(second - mean**2, 0.0, None) * trials / (trials - 1)
    return mean, np.sqrt(variance / trials)


def monte_carlo_profile(
    model,
    law,
    n_points,
    trials,
    seed,
    block_size=MONTE_CARLO_BLOCK,
    threads=1,
    verbose=False,
):
    '''
    Monte Carlo estimate of E[P_k], k = 1..n_points.

    Trials are split into fixed blocks of `block_size`; block b draws its
    schedules from `make_rng(seed, b)`. Block sums are combined with
    compensated summation in block order, so the result does not depend on
    `threads`.

    Parameters
    ----------
    model: return-probability model
        Anything with a vectorized `p0(t)`.
    law: PoissonLaw, PeriodicLaw or JitteredLaw
        Schedule law of every trial.
    n_points: int
        Measurements per trial (>= 1).
    trials: int
        Number of trials (>= 100).
    seed: int
        Base seed.
    block_size: int
        Trials per block.
    threads: int
        Worker threads.
    verbose: bool
        Show a progress bar.

    Returns
    -------
    MonteCarloProfile
    '''

    if trials < 100:
        raise ValueError(f'`trials` must be at least 100; received: {trials}')
    if trials > MAX_TRIALS:
        raise ResourceLimitError(
            f'{trials} trials exceed the limit of {MAX_TRIALS}'
        )
    if int(n_points) != n_points or n_points < 1:
        raise ValueError(f'`n_points` must be a positive integer; received: {n_points}')
    if seed is None:
        raise ValueError('Monte Carlo estimates require a seed')

    starts = range(0, trials, block_size)

    def run_block(block):
        rows = min(block_size, trials - starts[block])
        return _monte_carlo_block(model, law, n_points, seed, block, rows)

    with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as executor:
        results = list(
            tqdm.tqdm(
                executor.map(run_block, range(len(starts))),
                total=len(starts),
                disable=not verbose,
                dynamic_ncols=True,
                ascii=tqdm.utils.IS_WIN,
            )
        )

    sums, squares, increment_sums, increment_squares = zip(*results)
    values, std_errors = _mean_and_error(sums, squares, trials)
    increments, increment_std_errors = _mean_and_error(
        increment_sums, increment_squares, trials
    )

    return MonteCarloProfile(
        values=np.clip(values, 0.0, 1.0),
        std_errors=std_errors,
        increments=increments,
        increment_std_errors=increment_std_errors,
        trials=int(trials),
        seed=int(seed),
    )


def monte_carlo_expectation(
    model, law, n_points, trials, seed, threads=1, verbose=False
):
    '''
    Mean of the partial Polya number over `trials` independently generated
    schedules of `n_points` measurements, with its standard error.
    '''

    if n_points == 0:
        return PolyaEstimate(
            value=0.0,
            method='monte_carlo',
            n_points=0,
            trials=int(trials),
            law=law,
            model=model,
            seed=seed,
            rng_id=RNG_ID,
        )

    profile = monte_carlo_profile(
        model, law, n_points, trials, seed, threads=threads, verbose=verbose
    )
    return PolyaEstimate(
        value=float(profile.values[-1]),
        method='monte_carlo',
        n_points=int(n_points),
        trials=profile.trials,
        std_error=float(profile.std_errors[-1]),
        law=law,
        model=model,
        seed=int(seed),
        rng_id=RNG_ID,
        increments=tuple(float(v) for v in profile.increments),
    )


def default_nodes_per_dim(n_points):
    return 96 if n_points <= 3 else 48


def expected_increments(model, rate, n_points, nodes_per_dim, verbose=False):
    '''
    Poisson-averaged increments E[prod_{m<k} (1 - p0(t_m)) p0(t_k)] for
    k = 1..n_points by tensor-product Gauss-Laguerre quadrature.

    With u_k = rate * T_k the interarrival density becomes the Laguerre
    weight exp(-u), whose nodes sum to one in every dimension; the k-th
    increment therefore only needs the first k dimensions of the grid.
    Slices along the first dimension are evaluated in chunks to bound
    memory.
    '''

    nodes, weights = np.polynomial.laguerre.laggauss(nodes_per_dim)
    gaps = nodes / rate
    tail = nodes_per_dim ** (n_points - 1)
    chunk = max(1, _CHUNK_ELEMENTS // tail)

    partial = [[] for _ in range(n_points)]

    for start in tqdm.trange(
        0,
        nodes_per_dim,
        chunk,
        disable=not verbose,
        dynamic_ncols=True,
        ascii=tqdm.utils.IS_WIN,
    ):
        t = gaps[start : start + chunk]
        w = weights[start : start + chunk]
        survival = np.ones_like(t)

        for k in range(n_points):
            if k:
                t = t[..., np.newaxis] + gaps
                w = w[..., np.newaxis] * weights
                survival = survival[..., np.newaxis]

            p = _snap(model.p0(t))
            partial[k].append(float(np.sum(w * survival * p)))
            survival = survival * (1.0 - p)

    return np.array([math.fsum(v) for v in partial])


def quadrature_expectation(model, rate, n_points, nodes_per_dim=None, verbose=False):
    '''
    E[P_n] under Poisson sampling by Gauss-Laguerre quadrature.

    Parameters
    ----------
    model: return-probability model
        Anything with a vectorized `p0(t)`.
    rate: float
        Poisson intensity lambda.
    n_points: int
        Number of measurements, 1 to 4.
    nodes_per_dim: int or None
        Nodes per dimension (>= 32); 96 for up to three points and 48 for
        four when omitted.
    verbose: bool
        Show a progress bar.

    Returns
    -------
    PolyaEstimate
        `error_estimate` is the difference to a grid with two thirds of the
        nodes. The integrand oscillates, so the result should be checked
        against `monte_carlo_expectation`.
    '''

    if int(n_points) != n_points or not 1 <= n_points <= 4:
        raise ValueError(f'`n_points` must be in [1, 4]; received: {n_points}')
    if not rate > 0:
        raise ValueError(f'`rate` must be positive; received: {rate}')
    if nodes_per_dim is None:
        nodes_per_dim = default_nodes_per_dim(n_points)
    if nodes_per_dim < 32:
        raise ValueError(
            f'`nodes_per_dim` must be at least 32; received: {nodes_per_dim}'
        )

    coarse = max(32, (2 * nodes_per_dim) // 3)
    evaluations = nodes_per_dim**n_points + coarse**n_points
    if evaluations > MAX_QUADRATURE_EVALUATIONS:
        raise ResourceLimitError(
            f'{evaluations} quadrature evaluations exceed the limit of '
            f'{MAX_QUADRATURE_EVALUATIONS}; use monte_carlo_expectation instead'
        )

    increments = expected_increments(model, rate, n_points, nodes_per_dim, verbose)
    coarse_increments = expected_increments(model, rate, n_points, coarse)
    value = math.fsum(increments)

    return PolyaEstimate(
        value=float(np.clip(value, 0.0, 1.0)),
        method='quadrature',
        n_points=int(n_points),
        law=PoissonLaw(rate),
        model=model,
        error_estimate=abs(value - math.fsum(coarse_increments)),
        nodes_per_dim=int(nodes_per_dim),
        increments=tuple(float(v) for v in increments),
    )


def table1(
    dims=(2, 3, 4),
    rate=1.0,
    trials=10**6,
    seed=42,
    nodes_per_dim=None,
    threads=1,
    verbose=False,
):
    '''
    Truncated expectations E[P_3] and E[P_4] - E[P_3] of the d-dimensional
    lattice walk under Poisson sampling, by Monte Carlo and by quadrature.

    Returns
    -------
    list of dict
        One row per dimension.
    '''

    rows = []
    for d in dims:
        model = LatticeBesselModel(d)
        profile = monte_carlo_profile(
            model,
            PoissonLaw(rate),
            4,
            trials,
            seed,
            threads=threads,
            verbose=verbose,
        )
        three = quadrature_expectation(model, rate, 3, nodes_per_dim, verbose)
        four = quadrature_expectation(model, rate, 4, verbose=verbose)

        mc_value, mc_error = float(profile.values[2]), float(profile.std_errors[2])
        rows.append(
            {
                'd': d,
                'rate': rate,
                'expected_p3_monte_carlo': mc_value,
                'std_error_p3': mc_error,
                'expected_p3_quadrature': three.value,
                'quadrature_error_p3': three.error_estimate,
                'increment_p4_monte_carlo': float(profile.increments[3]),
                'increment_std_error': float(profile.increment_std_errors[3]),
                'increment_p4_quadrature': four.increments[3],
                'methods_agree': abs(mc_value - three.value)
                <= 3 * (mc_error + three.error_estimate),
            }
        )
    return rows


def first_measurement_sweep(model, period, firsts, n_points):
    '''
    Partial Polya number of periodic schedules as a function of the first
    measurement time.
    '''
    return np.array(
        [
            partial_polya(model, generate(PeriodicLaw(period, first), n_points))
            for first in firsts
        ]
    )


GROWTH_MODELS = ('converging', 'logarithmic', 'linear')


@dataclasses.dataclass(frozen=True)
class GrowthFit:
    model: str
    coefficient: float
    intercept: float
    r_squared: float
    tied: bool
    residuals: dict


@dataclasses.dataclass(frozen=True, eq=False)
class DivergenceDiagnostic:
    '''
    Partial sums S_n = sum_{i<=n} p0(t_i) with the best of the growth models
    a ln t + b, a t + b and A - B / t.
    '''

    n: np.ndarray
    times: np.ndarray
    partial_sums: np.ndarray
    growth_fit: GrowthFit
    tail_bound: float
    verdict: str

    def save_csv(self, filename):
        '''Columns (n, t_n, S_n).'''
        save_csv(filename, ['n', 't_n', 'S_n'], [self.n, self.times, self.partial_sums])

    def to_json(self):
        return {
            'growth_fit': dataclasses.asdict(self.growth_fit),
            'tail_bound': self.tail_bound,
            'verdict': self.verdict,
            'max_points': int(self.n[-1]),
            'final_sum': float(self.partial_sums[-1]),
        }


def _fit_growth(times, sums, tail_bound, tail_tolerance):
    features = {
        'converging': 1.0 / times,
        'logarithmic': np.log(times),
        'linear': times,
    }
    fits = {
        name: fit_linear_model([x], sums) for name, x in features.items()
    }
    rss = {name: fit[1] for name, fit in fits.items()}

    best = min(rss.values())
    floor = len(sums) * (1e-10 * max(1.0, abs(float(sums[-1])))) ** 2
    tied = [
        name for name in GROWTH_MODELS if rss[name] <= 1.01 * best + floor
    ]

    # saturated sums: growth below the tolerance over the last decade
    if tail_bound < tail_tolerance and 'converging' not in tied:
        tied = ['converging', *tied]

    chosen = tied[0]
    coefficients, _, r_squared = fits[chosen]
    coefficient = float(coefficients[0])
    if chosen == 'converging':
        # S = A - B / t
        coefficient = -coefficient

    if chosen == 'converging':
        verdict = 'convergent'
        if len(tied) > 1 and tail_bound >= tail_tolerance:
            verdict = 'boundary'
    else:
        verdict = 'divergent'

    fit = GrowthFit(
        model=chosen,
        coefficient=coefficient,
        intercept=float(coefficients[-1]),
        r_squared=float(r_squared),
        tied=len(tied) > 1,
        residuals={name: float(v) for name, v in rss.items()},
    )
    return fit, verdict


def divergence_diagnostic(
    model, law, max_points, seed=None, tail_tolerance=1e-3, fit_points=256
):
    '''
    Partial sums of p0 over one schedule realization and their growth.

    Parameters
    ----------
    model: return-probability model
        Anything with a vectorized `p0(t)`.
    law: PoissonLaw, PeriodicLaw or JitteredLaw
        Schedule law.
    max_points: int
        Number of measurements (>= 1000).
    seed: int or None
        Seed for random laws.
    tail_tolerance: float
        Increase of S over the last decade of n below which the sum counts
        as saturated.
    fit_points: int
        Log-spaced indices in [max_points / 100, max_points] used for the fit.

    Returns
    -------
    DivergenceDiagnostic
    '''

    if max_points < 1000:
        raise ValueError(f'`max_points` must be at least 1000; received: {max_points}')

    schedule = generate(law, max_points, seed)
    times = schedule.times
    sums = np.cumsum(model.p0(times))
    n = np.arange(1, max_points + 1)

    window = np.unique(
        np.geomspace(max(1, max_points // 100), max_points, fit_points).astype(int)
    ) - 1
    tail_bound = float(sums[-1] - sums[max_points // 10 - 1])
    fit, verdict = _fit_growth(times[window], sums[window], tail_bound, tail_tolerance)

    return DivergenceDiagnostic(
        n=n,
        times=times,
        partial_sums=sums,
        growth_fit=fit,
        tail_bound=tail_bound,
        verdict=verdict,
    )


@dataclasses.dataclass(frozen=True)
class RecurrenceVerdict:
    verdict: str
    alpha_estimate: float
    confidence_interval: tuple
    n_maxima: int
    tolerance: float

    def to_json(self):
        return dataclasses.asdict(self)


def _local_maxima(t, p):
    inner = (p[1:-1] > p[:-2]) & (p[1:-1] >= p[2:]) & (p[1:-1] > 0)
    index = np.flatnonzero(inner) + 1
    if index.size == 0:
        return index, index

    # parabolic refinement through the three samples around each maximum
    left, center, right = p[index - 1], p[index], p[index + 1]
    curvature = left - 2 * center + right
    safe = np.where(curvature < 0, curvature, -1.0)
    step = t[1] - t[0]
    offset = np.where(curvature < 0, 0.5 * step * (left - right) / safe, 0.0)
    peak = np.where(
        curvature < 0, center - (left - right) ** 2 / (8 * safe), center
    )
    return t[index] + offset, peak


def _slopes(x, y):
    x = x - x.mean(axis=-1, keepdims=True)
    y = y - y.mean(axis=-1, keepdims=True)
    return (x * y).sum(axis=-1) / (x * x).sum(axis=-1)


def estimate_decay_exponent(
    model,
    t_min=20.0,
    t_max=2000.0,
    grid_points=200_000,
    bootstrap=1000,
    seed=0,
    tolerance=0.05,
):
    '''
    Fits p0_max(t) ~ t^-alpha to the local maxima of p0 on a uniform grid.

    Traces without interior maxima (pure envelopes) are fitted directly on a
    log-spaced subgrid. The grid must resolve the oscillation of p0; the
    default resolves the line's period pi / 2 on [20, 2000] comfortably.

    Parameters
    ----------
    model: return-probability model
        Anything with a vectorized `p0(t)`.
    t_min, t_max: float
        Fit window, t_max >= 10 t_min > 0.
    grid_points: int
        Uniform grid size (>= 1000).
    bootstrap: int
        Bootstrap resamples for the confidence interval.
    seed: int
        Bootstrap seed.
    tolerance: float
        Half-width of the dead band around alpha = 1.

    Returns
    -------
    RecurrenceVerdict
        'recurrent' if the upper 95% bound is at most 1 + tolerance,
        'transient' if the lower bound exceeds 1 + tolerance, 'boundary'
        otherwise.
    '''

    if not (t_min > 0 and t_max >= 10 * t_min):
        raise ValueError(
            f'Need t_max >= 10 * t_min > 0; received: {t_min}, {t_max}'
        )
    if grid_points < 1000:
        raise ValueError(f'`grid_points` must be at least 1000; received: {grid_points}')

    t = np.linspace(t_min, t_max, grid_points)
    p = np.asarray(model.p0(t))

    peak_times, peaks = _local_maxima(t, p)
    if peaks.size == 0:
        index = np.unique(np.geomspace(1, grid_points, 256).astype(int) - 1)
        peak_times, peaks = t[index], p[index]

    keep = (peaks > 1e-300) & (peaks < 1.0)
    peak_times, peaks = peak_times[keep], peaks[keep]
    if peaks.size < 10:
        raise InsufficientDataError(
            f'Found {peaks.size} usable maxima in [{t_min}, {t_max}]; need 10'
        )

    x, y = np.log(peak_times), np.log(peaks)
    alpha = -float(_slopes(x, y))

    rng = make_rng(seed)
    samples = rng.integers(0, x.size, size=(bootstrap, x.size))
    with np.errstate(invalid='ignore', divide='ignore'):
        alphas = -_slopes(x[samples], y[samples])
    alphas = alphas[np.isfinite(alphas)]
    low, high = (float(v) for v in np.percentile(alphas, [2.5, 97.5]))

    if high <= 1 + tolerance:
        verdict = 'recurrent'
    elif low > 1 + tolerance:
        verdict = 'transient'
    else:
        verdict = 'boundary'

    return RecurrenceVerdict(
        verdict=verdict,
        alpha_estimate=alpha,
        confidence_interval=(low, high),
        n_maxima=int(peaks.size),
        tolerance=tolerance,
    )


@dataclasses.dataclass(frozen=True, eq=False)
class WalkClassification:
    verdict: str
    divergence: DivergenceDiagnostic
    decay: RecurrenceVerdict = None

    def to_json(self):
        return {
            'verdict': self.verdict,
            'divergence': self.divergence.to_json(),
            'decay': None if self.decay is None else self.decay.to_json(),
        }


def classify_walk(model, law, max_points=100_000, seed=0, tail_tolerance=1e-3):
    '''
    Recurrence verdict under a measurement law.

    A divergent partial sum of p0 means recurrent and a convergent one
    transient. When the growth fit is inconclusive the decay exponent of p0
    decides; it stays 'boundary' if that is unavailable or inconclusive too.
    '''

    divergence = divergence_diagnostic(
        model, law, max_points, seed, tail_tolerance=tail_tolerance
    )
    if divergence.verdict == 'divergent':
        return WalkClassification('recurrent', divergence)
    if divergence.verdict == 'convergent':
        return WalkClassification('transient', divergence)

    try:
        decay = estimate_decay_exponent(model, seed=seed)
    except InsufficientDataError:
        return WalkClassification('boundary', divergence)
    return WalkClassification(decay.verdict, divergence, decay)
