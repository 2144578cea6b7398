# Copyright 2026 The ctqw Authors.
# MIT License (see LICENSE.md)

__version__ = '0.3.0'
