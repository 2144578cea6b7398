# Copyright 2026 The ctqw Authors.
# MIT License (see LICENSE.md)

import csv
import json
import numpy as np
import pathlib

RNG_ID = 'numpy-philox4x64-seedsequence'


class ResourceLimitError(RuntimeError):
    '''A request exceeds a configured size or evaluation cap.'''


class NumericalError(RuntimeError):
    '''A numerical routine failed to converge.'''


class InsufficientDataError(ValueError):
    '''Too few samples to fit the requested model.'''


def make_rng(seed, *stream):
    '''
    Returns a counter-based generator for `seed` and an optional stream
    index. Streams are mixed through `numpy.random.SeedSequence`, so
    `make_rng(seed, i)` is independent of how many other streams exist.

    Parameters
    ----------
    seed: int
        Non-negative 64-bit seed.
    stream: int
        Optional stream indices (e.g. Monte Carlo block number).

    Returns
    -------
    numpy.random.Generator
        Philox-backed generator.
    '''

    if seed is None or int(seed) < 0 or int(seed) >= 2**64:
        raise ValueError(f'`seed` must be a 64-bit unsigned integer; received: {seed}')

    sequence = np.random.SeedSequence([int(seed), *[int(s) for s in stream]])
    return np.random.Generator(np.random.Philox(sequence))


def format_float(x):
    '''17 significant digits, enough for an exact float round trip.'''
    return f'{float(x):.17g}'


def save_csv(filename, header, columns):
    '''
    Writes equally long columns to a CSV file. Float columns are written
    with 17 significant digits, integer columns as integers.
    '''

    columns = [np.asarray(c) for c in columns]
    if len({len(c) for c in columns}) > 1:
        raise ValueError('All CSV columns must have the same length')

    formatters = [
        (lambda v: str(int(v)))
        if np.issubdtype(c.dtype, np.integer)
        else format_float
        for c in columns
    ]

    path = pathlib.Path(filename)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        for row in zip(*columns):
            writer.writerow([fmt(v) for fmt, v in zip(formatters, row)])


def load_csv(filename):
    '''Reads a CSV written by `save_csv`; returns (header, float columns).'''
    with open(filename, newline='') as f:
        rows = list(csv.reader(f))
    header, body = rows[0], rows[1:]
    data = np.array(body, dtype=np.float64).reshape(len(body), len(header))
    return header, [data[:, i] for i in range(len(header))]


def to_jsonable(value):
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        # repr of a Python float is the shortest exact round trip
        return float(value)
    return value


def save_json(filename, obj):
    path = pathlib.Path(filename)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w') as f:
        json.dump(to_jsonable(obj), f, indent=2, sort_keys=True)
        f.write('\n')


def fit_linear_model(features, y):
    '''
    Ordinary least squares of `y` on the given feature columns plus an
    intercept.

    Returns
    -------
    tuple
        (coefficients, residual sum of squares, r squared); the intercept is
        the last coefficient.
    '''

    y = np.asarray(y, dtype=np.float64)
    design = np.column_stack([*features, np.ones_like(y)])
    coefficients, *_ = np.linalg.lstsq(design, y, rcond=None)
    residual = y - design @ coefficients
    rss = float(residual @ residual)
    centered = y - y.mean()
    tss = float(centered @ centered)
    r_squared = 1.0 - rss / tss if tss > 0 else 1.0
    return coefficients, rss, r_squared
