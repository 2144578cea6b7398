# Copyright 2026 The ctqw Authors.
# MIT License (see LICENSE.md)

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1]))


def pytest_configure(config):
    config.addinivalue_line(
        'markers', 'slow: long Monte Carlo / quadrature runs (deselect with -m "not slow")'
    )
