# Copyright 2026 The ctqw Authors.
# MIT License (see LICENSE.md)

import argparse
import json
import jsonschema
import pathlib
import sys

from ctqw.experiment import COMMANDS, MODELS, load_manifest_config, run
from ctqw.propagator import ENVELOPE_PRESETS
from ctqw.utils import InsufficientDataError, NumericalError, ResourceLimitError


def boolean(string):
    value = string.lower()
    if value in ('true', 'yes', '1'):
        return True
    if value in ('false', 'no', '0'):
        return False
    raise argparse.ArgumentTypeError(f'{string} is not a boolean')


def list_of_floats(string):
    return [float(s) for s in string.split(',')]


def list_of_ints(string):
    return [int(s) for s in string.split(',')]


def positive_int(string):
    x = int(string)
    if x < 1:
        raise argparse.ArgumentTypeError(f'{x} is not a positive integer')
    return x


# argparse destination -> experiment config key
_FLAGS = {
    'out': 'output',
    'seed': 'seed',
    'threads': 'threads',
    'json_manifest': 'json_manifest',
    'model': 'model',
    'preset': 'preset',
    'method': 'method',
    'n': 'n',
    'd': 'd',
    'l': 'l',
    'gamma': 'gamma',
    'alpha': 'alpha',
    'modulation': 'modulation',
    'scale': 'scale',
    'decay': 'decay',
    'decay_rate': 'decay_rate',
    'law': 'law',
    'rate': 'rate',
    'period': 'period',
    'first': 'first',
    'delta': 'delta',
    'n_points': 'n_points',
    'trials': 'trials',
    'nodes_per_dim': 'nodes_per_dim',
    'max_points': 'max_points',
    't_min': 't_min',
    't_max': 't_max',
    'points': 'points',
    'bootstrap': 'bootstrap',
    'dims': 'dims',
    'firsts': 'firsts',
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('-c', '--config', type=str)
    common.add_argument('-o', '--out', type=str)
    common.add_argument('--seed', type=int)
    common.add_argument('--threads', type=positive_int)
    common.add_argument('--json-manifest', dest='json_manifest', type=boolean)
    common.add_argument('-q', '--quiet', action='store_true')

    model = common.add_argument_group('model')
    model.add_argument('--model', type=str, choices=MODELS)
    model.add_argument('--preset', type=str, choices=list(ENVELOPE_PRESETS))
    model.add_argument(
        '--method', type=str, choices=['auto', 'dense', 'fourier', 'closed']
    )
    model.add_argument('--n', type=int)
    model.add_argument('--d', type=int)
    model.add_argument('--l', type=int)
    model.add_argument('--gamma', type=float)
    model.add_argument('--alpha', type=float)
    model.add_argument(
        '--modulation', type=str, choices=['constant', 'cosine_squared']
    )
    model.add_argument('--scale', type=float)
    model.add_argument('--decay', type=str, choices=['power', 'exponential'])
    model.add_argument('--decay-rate', dest='decay_rate', type=float)

    law = common.add_argument_group('schedule law')
    law.add_argument(
        '--law', type=str, choices=['poisson', 'periodic', 'jittered']
    )
    law.add_argument('--lambda', dest='rate', type=float)
    law.add_argument('--period', type=float)
    law.add_argument('--first', type=float)
    law.add_argument('--delta', type=float)

    knobs = common.add_argument_group('estimators')
    knobs.add_argument('--n-points', dest='n_points', type=int)
    knobs.add_argument('--trials', type=int)
    knobs.add_argument('--nodes-per-dim', dest='nodes_per_dim', type=int)
    knobs.add_argument('--max-points', dest='max_points', type=int)
    knobs.add_argument('--t-min', dest='t_min', type=float)
    knobs.add_argument('--t-max', dest='t_max', type=float)
    knobs.add_argument('--points', type=int)
    knobs.add_argument('--bootstrap', type=int)
    knobs.add_argument('--dims', type=list_of_ints)
    knobs.add_argument('--firsts', type=list_of_floats)

    parser = argparse.ArgumentParser(
        description='Return probabilities and Polya numbers of '
        'continuous-time quantum walks under repeated measurement'
    )
    subparsers = parser.add_subparsers(dest='command', required=True)
    for command in COMMANDS:
        subparsers.add_parser(command, parents=[common])

    replay = subparsers.add_parser('replay')
    replay.add_argument('manifest', type=str)
    replay.add_argument('-o', '--out', type=str)
    replay.add_argument('-q', '--quiet', action='store_true')

    return parser


def load_config(args):
    if args.command == 'replay':
        with open(args.manifest) as f:
            config = load_manifest_config(json.load(f))
        if args.out is not None:
            config['output'] = args.out
        return config

    config = {}
    if args.config is not None:
        with open(args.config) as f:
            config.update(json.load(f))

    # flags override the config file
    config['command'] = args.command
    for dest, key in _FLAGS.items():
        value = getattr(args, dest)
        if value is not None:
            config[key] = value
    return config


def main(argv=None):
    args = build_parser().parse_args(argv)

    try:
        config = load_config(args)
        written = run(config, verbose=not args.quiet)
    except InsufficientDataError as e:
        print('Not enough data for the fit:', e, file=sys.stderr)
        return 4
    except NumericalError as e:
        print('Numerical failure:', e, file=sys.stderr)
        return 5
    except (jsonschema.ValidationError, ValueError, IndexError) as e:
        print('Invalid configuration:', getattr(e, 'message', e), file=sys.stderr)
        return 2
    except ResourceLimitError as e:
        print('Resource limit exceeded:', e, file=sys.stderr)
        return 3
    except OSError as e:
        print(e, file=sys.stderr)
        return 1

    if not args.quiet:
        for path in written:
            print('Saved', pathlib.Path(path))
    return 0


if __name__ == '__main__':
    sys.exit(main())
