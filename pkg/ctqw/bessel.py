# Copyright 2026 The ctqw Authors.
# MIT License (see LICENSE.md)

import dataclasses
import math
import numexpr
import numpy as np

MAX_ORDER = 512

_SERIES_TERMS = 48
_HANKEL_MAX_TERMS = 40
_RESCALE_THRESHOLD = 1e250


@dataclasses.dataclass(frozen=True)
class BesselEvalConfig:
    '''
    Accuracy knobs of the Bessel kernel.

    Parameters
    ----------
    series_cutoff: float
        Arguments up to this value are evaluated with the power series.
    asymptotic_cutoff: float
        Arguments above this value may use the Hankel asymptotic expansion
        (summed up to its smallest term). Between the two cutoffs, and for
        orders not smaller than the argument, the normalized backward
        recurrence is used.
    target_abs_error: float
        Absolute error the expansions are truncated at.
    '''

    series_cutoff: float = 12.0
    asymptotic_cutoff: float = 20.0
    target_abs_error: float = 1e-12

    def __post_init__(self):
        if not 0 < self.series_cutoff <= self.asymptotic_cutoff:
            raise ValueError(
                '`series_cutoff` must be positive and not larger than '
                f'`asymptotic_cutoff`; received: {self.series_cutoff}, '
                f'{self.asymptotic_cutoff}'
            )
        if self.target_abs_error < 1e-14:
            raise ValueError(
                '`target_abs_error` must be at least 1e-14; '
                f'received: {self.target_abs_error}'
            )


DEFAULT_CONFIG = BesselEvalConfig()


def _as_argument(x):
    x = np.asarray(x, dtype=np.float64)
    if np.isnan(x).any():
        raise ValueError('Bessel argument must not be NaN')
    if (x < 0).any():
        raise ValueError('Bessel argument must be non-negative')
    return x


def _check_order(order):
    if int(order) != order or not 0 <= order <= MAX_ORDER:
        raise ValueError(
            f'`order` must be an integer in [0, {MAX_ORDER}]; '
            f'received: {order}'
        )
    return int(order)


def _series(order, x):
    half = 0.5 * x
    y = -half * half
    if order == 0:
        term = np.ones_like(x)
    else:
        # (x/2)^m / m! overflows as a quotient for m > 170
        with np.errstate(divide='ignore'):
            term = np.exp(order * np.log(half) - math.lgamma(order + 1))
    total = term.copy()
    for k in range(1, _SERIES_TERMS):
        term = term * y / (k * (k + order))
        total += term
    return total


def _hankel(order, x, target):
    mu = 4.0 * order * order
    p = np.ones_like(x)
    q = np.zeros_like(x)
    coefficient = np.ones_like(x)
    previous = np.full_like(x, np.inf)
    active = np.ones(x.shape, dtype=bool)

    for k in range(1, _HANKEL_MAX_TERMS):
        coefficient = coefficient * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        magnitude = np.abs(coefficient)

        # optimal truncation: stop each element at its smallest term
        active &= magnitude < previous
        if not active.any():
            break

        term = np.where(active, coefficient, 0.0)
        if k % 2:
            q += (-1) ** (k // 2) * term
        else:
            p += (-1) ** (k // 2) * term

        previous = magnitude
        active &= magnitude > target * 1e-3
        if not active.any():
            break

    chi = x - (0.5 * order + 0.25) * np.pi
    return numexpr.evaluate(
        'sqrt(2 / (pi * x)) * (p * cos(chi) - q * sin(chi))',
        local_dict={'x': x, 'p': p, 'q': q, 'chi': chi, 'pi': np.pi},
    )


def _hankel_with_recurrence(order, x, target):
    j0 = _hankel(0, x, target)
    if order == 0:
        return j0

    j1 = _hankel(1, x, target)

    # forward recurrence is stable while order < x
    for k in range(1, order):
        j0, j1 = j1, (2.0 * k / x) * j1 - j0

    return j1


def _miller(order, x):
    x_max = float(x.max())
    start = int(max(order, x_max) + 15.0 * (x_max ** (1.0 / 3.0) + 1.0)) + 20
    start += start % 2

    upper = np.zeros_like(x)
    current = np.full_like(x, 1e-30)
    norm = 2.0 * current
    result = np.zeros_like(x)

    for k in range(start, 0, -1):
        lower = (2.0 * k / x) * current - upper
        upper, current = current, lower

        if k - 1 == order:
            result = current.copy()
        if k - 1 > 0 and (k - 1) % 2 == 0:
            norm += 2.0 * current

        big = np.abs(current) > _RESCALE_THRESHOLD
        if big.any():
            factor = np.where(big, 1.0 / _RESCALE_THRESHOLD, 1.0)
            upper *= factor
            current *= factor
            norm *= factor
            result *= factor

    norm += current
    return result / norm


def bessel_j(order, x, config=DEFAULT_CONFIG):
    '''
    Bessel function of the first kind of integer order.

    Parameters
    ----------
    order: int
        Non-negative order, at most `MAX_ORDER`. Negative orders are left to
        the caller (J_{-m} = (-1)^m J_m).
    x: float or array_like
        Non-negative argument(s).
    config: BesselEvalConfig
        Region boundaries and truncation error.

    Returns
    -------
    float or ndarray
        J_order(x), with the shape of `x`.
    '''

    order = _check_order(order)
    x = _as_argument(x)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)

    small = x <= config.series_cutoff
    large = (x > config.asymptotic_cutoff) & (x > order)
    moderate = ~(small | large)

    result = np.empty_like(x)
    if small.any():
        result[small] = _series(order, x[small])
    if large.any():
        result[large] = _hankel_with_recurrence(
            order, x[large], config.target_abs_error
        )
    if moderate.any():
        result[moderate] = _miller(order, x[moderate])

    np.clip(result, -1.0, 1.0, out=result)
    return float(result[0]) if scalar else result


def bessel_j_signed(order, x, config=DEFAULT_CONFIG):
    '''J_m(x) for any integer order |m| <= MAX_ORDER.'''
    value = bessel_j(abs(order), x, config)
    return -value if order < 0 and order % 2 else value


def bessel_j0_asymptotic(x, config=DEFAULT_CONFIG):
    '''
    Leading term of the large-argument expansion,
    sqrt(2 / (pi x)) cos(x - pi / 4).
    '''
    x = _as_argument(x)
    if (x < config.asymptotic_cutoff).any():
        raise ValueError(
            'The asymptotic form is only valid for x >= '
            f'{config.asymptotic_cutoff}; received: {x.min()}'
        )

    result = numexpr.evaluate(
        'sqrt(2 / (pi * x)) * cos(x - pi / 4)',
        local_dict={'x': np.atleast_1d(x), 'pi': np.pi},
    )
    return float(result[0]) if x.ndim == 0 else result


def bessel_j0_envelope(x):
    '''sqrt(2 / (pi x)), the decay envelope of J_0.'''
    x = _as_argument(x)
    return np.sqrt(2.0 / (np.pi * x))
