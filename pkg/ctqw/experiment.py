# Copyright 2026 The ctqw Authors.
# MIT License (see LICENSE.md)

import jsonschema
import numpy as np
import pathlib

from . import __version__
from .graph import GraphSpec
from .polya import (
    divergence_diagnostic,
    estimate_decay_exponent,
    first_measurement_sweep,
    monte_carlo_expectation,
    quadrature_expectation,
    table1,
)
from .propagator import (
    ENVELOPE_PRESETS,
    CyclicModel,
    EnvelopeModel,
    LatticeBesselModel,
    LineBesselModel,
    cyclic_closed_form,
    save_p0_trace,
    spectral_model,
)
from .scheduler import (
    JitteredLaw,
    PeriodicLaw,
    PoissonLaw,
    generate,
    save_schedule_csv,
)
from .utils import RNG_ID, save_csv, save_json

COMMANDS = (
    'p0-trace',
    'schedule',
    'polya-mc',
    'polya-quad',
    'diagnose',
    'classify',
    'table1',
    'sweep',
)

GRAPH_MODELS = ('cycle', 'path', 'complete', 'star', 'torus')
MODELS = (*GRAPH_MODELS, 'line', 'lattice', 'envelope')

SCHEMA = {
    'type': 'object',
    'properties': {
        'command': {'type': 'string', 'enum': list(COMMANDS)},
        'output': {'type': 'string'},
        'seed': {'type': 'integer', 'minimum': 0, 'maximum': 2**64 - 1},
        'threads': {'type': 'integer', 'minimum': 1},
        'json_manifest': {'type': 'boolean'},
        'model': {'type': 'string', 'enum': list(MODELS)},
        'preset': {'type': 'string', 'enum': list(ENVELOPE_PRESETS)},
        'method': {
            'type': 'string',
            'enum': ['auto', 'dense', 'fourier', 'closed'],
        },
        'n': {'type': 'integer', 'minimum': 2},
        'd': {'type': 'integer', 'minimum': 1},
        'l': {'type': 'integer', 'minimum': 3},
        'gamma': {'type': 'number', 'exclusiveMinimum': 0},
        'alpha': {'type': 'number', 'exclusiveMinimum': 0},
        'modulation': {
            'type': 'string',
            'enum': ['constant', 'cosine_squared'],
        },
        'scale': {'type': 'number', 'exclusiveMinimum': 0},
        'decay': {'type': 'string', 'enum': ['power', 'exponential']},
        'decay_rate': {'type': 'number', 'exclusiveMinimum': 0},
        'law': {'type': 'string', 'enum': ['poisson', 'periodic', 'jittered']},
        'rate': {'type': 'number', 'exclusiveMinimum': 0},
        'period': {'type': 'number', 'exclusiveMinimum': 0},
        'first': {'type': 'number', 'exclusiveMinimum': 0},
        'delta': {'type': 'number', 'exclusiveMinimum': 0},
        'n_points': {'type': 'integer', 'minimum': 0},
        'trials': {'type': 'integer', 'minimum': 100},
        'nodes_per_dim': {'type': 'integer', 'minimum': 32},
        'max_points': {'type': 'integer', 'minimum': 1000},
        't_min': {'type': 'number', 'minimum': 0},
        't_max': {'type': 'number', 'exclusiveMinimum': 0},
        'points': {'type': 'integer', 'minimum': 2},
        'bootstrap': {'type': 'integer', 'minimum': 10},
        'dims': {
            'type': 'array',
            'items': {'type': 'integer', 'minimum': 1},
            'minItems': 1,
        },
        'firsts': {
            'type': 'array',
            'items': {'type': 'number', 'exclusiveMinimum': 0},
            'minItems': 1,
        },
    },
    'required': ['command', 'output'],
    'additionalProperties': False,
}

_COMMAND_DEFAULTS = {
    'p0-trace': {'t_min': 0.0, 't_max': 50.0, 'points': 2000},
    'schedule': {'n_points': 100},
    'polya-mc': {'n_points': 3, 'trials': 100_000},
    'polya-quad': {'n_points': 3},
    'diagnose': {'max_points': 100_000},
    'classify': {
        't_min': 20.0,
        't_max': 2000.0,
        'points': 200_000,
        'bootstrap': 1000,
    },
    'table1': {'trials': 1_000_000, 'seed': 42, 'dims': [2, 3, 4]},
    'sweep': {'n_points': 1000},
}

_NEEDS_MODEL = ('p0-trace', 'polya-mc', 'polya-quad', 'diagnose', 'classify', 'sweep')
_NEEDS_LAW = ('schedule', 'polya-mc', 'diagnose')
_UNIT_GAMMA_MODELS = ('line', 'lattice', 'envelope')


def complete_config(config):
    '''
    Validates an experiment config and fills in defaults (in place).

    Returns
    -------
    dict
        The completed config.
    '''

    jsonschema.validate(config, SCHEMA)

    for key, value in _COMMAND_DEFAULTS[config['command']].items():
        config.setdefault(key, value)
    config.setdefault('seed', 0)
    config.setdefault('threads', 1)
    config.setdefault('json_manifest', True)
    config.setdefault('gamma', 1.0)
    config.setdefault('method', 'auto')

    command = config['command']
    if command in _NEEDS_MODEL and 'model' not in config and 'preset' not in config:
        raise ValueError(f'`{command}` needs --model (or --preset)')
    if command in _NEEDS_LAW:
        config.setdefault('law', 'poisson')
        config.setdefault('rate', 1.0)
    if command in ('polya-quad', 'table1'):
        config.setdefault('rate', 1.0)
    if command == 'sweep':
        for key in ('period', 'firsts'):
            if key not in config:
                raise ValueError(f'`sweep` needs `{key}`')
    if config.get('t_max', np.inf) <= config.get('t_min', 0.0):
        raise ValueError('`t_max` must be larger than `t_min`')
    if config['gamma'] != 1.0 and (
        command == 'table1'
        or 'preset' in config
        or config.get('model') in _UNIT_GAMMA_MODELS
    ):
        raise ValueError(
            'Bessel and envelope models are written for gamma = 1; '
            f'received: {config["gamma"]}'
        )

    # constructing the objects validates the remaining knobs
    if command in _NEEDS_LAW:
        build_law(config)
    return config


def build_law(config):
    law = config['law']
    if law == 'poisson':
        return PoissonLaw(config['rate'])

    for key in ('period', 'first'):
        if key not in config:
            raise ValueError(f'The {law} law needs `{key}`')
    if law == 'periodic':
        return PeriodicLaw(config['period'], config['first'])

    if 'delta' not in config:
        raise ValueError('The jittered law needs `delta`')
    return JitteredLaw(config['period'], config['first'], config['delta'])


def build_model(config):
    if 'preset' in config:
        return ENVELOPE_PRESETS[config['preset']]

    model = config['model']
    if model == 'line':
        return LineBesselModel()
    if model == 'lattice':
        if 'd' not in config:
            raise ValueError('The lattice model needs `d`')
        return LatticeBesselModel(config['d'])
    if model == 'envelope':
        return EnvelopeModel(
            alpha=config.get('alpha'),
            modulation=config.get('modulation', 'constant'),
            scale=config.get('scale', 1.0),
            decay=config.get('decay', 'power'),
            rate=config.get('decay_rate'),
        )

    if model == 'torus':
        spec = GraphSpec('torus', d=config.get('d'), l=config.get('l'))
    else:
        spec = GraphSpec(model, n=config.get('n'))

    if config['method'] == 'closed':
        if model != 'cycle':
            raise ValueError('The closed form is only available for cycles')
        return CyclicModel(cyclic_closed_form(spec.n, config['gamma']))
    return spectral_model(spec, config['gamma'], config['method'])


def _sibling(path, suffix):
    return path.with_name(path.name + suffix)


def run(config, verbose=True):
    '''
    Runs one experiment and writes its artifacts.

    Parameters
    ----------
    config: dict
        Experiment config (see `SCHEMA`); completed in place.
    verbose: bool
        Print progress.

    Returns
    -------
    list of pathlib.Path
        Written files, manifest last.
    '''

    config = complete_config(config)
    command = config['command']
    output = pathlib.Path(config['output'])
    written = [output]

    def report(*args):
        if verbose:
            print(*args)

    law = build_law(config) if command in _NEEDS_LAW else None
    model = build_model(config) if command in _NEEDS_MODEL else None
    result = None

    report(f'Running {command}')
    for key in sorted(config):
        report(f'  - {key} =', config[key])

    if command == 'p0-trace':
        times = np.linspace(config['t_min'], config['t_max'], config['points'])
        report('Writing trace to', output)
        save_p0_trace(output, times, model.p0(times))

    elif command == 'schedule':
        schedule = generate(law, config['n_points'], config['seed'])
        report('Writing schedule to', output)
        if output.suffix == '.json':
            save_json(output, schedule.to_json())
        else:
            save_schedule_csv(output, schedule)

    elif command == 'polya-mc':
        estimate = monte_carlo_expectation(
            model,
            law,
            config['n_points'],
            config['trials'],
            config['seed'],
            threads=config['threads'],
            verbose=verbose,
        )
        result = estimate.to_json()
        save_json(output, result)

    elif command == 'polya-quad':
        estimate = quadrature_expectation(
            model,
            config['rate'],
            config['n_points'],
            config.get('nodes_per_dim'),
            verbose=verbose,
        )
        result = estimate.to_json()
        save_json(output, result)

    elif command == 'diagnose':
        diagnostic = divergence_diagnostic(
            model, law, config['max_points'], config['seed']
        )
        result = diagnostic.to_json()
        report('Writing partial sums to', output)
        diagnostic.save_csv(output)
        summary = _sibling(output, '.fit.json')
        save_json(summary, result)
        written.append(summary)

    elif command == 'classify':
        verdict = estimate_decay_exponent(
            model,
            config['t_min'],
            config['t_max'],
            config['points'],
            config['bootstrap'],
            config['seed'],
        )
        result = verdict.to_json()
        report('Verdict:', verdict.verdict, f'(alpha = {verdict.alpha_estimate:.4f})')
        save_json(output, result)

    elif command == 'table1':
        rows = table1(
            dims=config['dims'],
            rate=config['rate'],
            trials=config['trials'],
            seed=config['seed'],
            nodes_per_dim=config.get('nodes_per_dim'),
            threads=config['threads'],
            verbose=verbose,
        )
        for row in rows:
            report(
                f"  d = {row['d']}: E[P3] = {row['expected_p3_monte_carlo']:.5f} "
                f"+/- {row['std_error_p3']:.5f} (MC), "
                f"{row['expected_p3_quadrature']:.5f} (quadrature)"
            )
        result = {'rows': rows}
        save_json(output, result)

    elif command == 'sweep':
        firsts = np.asarray(config['firsts'], dtype=np.float64)
        values = first_measurement_sweep(
            model, config['period'], firsts, config['n_points']
        )
        save_csv(output, ['first', 'polya'], [firsts, values])

    if config['json_manifest']:
        manifest = _sibling(output, '.manifest.json')
        save_json(
            manifest,
            {
                'config': config,
                'seed': config['seed'],
                'rng_id': RNG_ID,
                'version': __version__,
                'model': None if model is None else model.to_json(),
                'law': None if law is None else law.to_json(),
                'result': result,
                'outputs': [str(p) for p in written],
            },
        )
        written.append(manifest)

    return written


def load_manifest_config(manifest):
    '''Experiment config stored in a run manifest (a dict).'''
    if 'config' not in manifest:
        raise ValueError('Not a run manifest: missing `config`')
    return dict(manifest['config'])
