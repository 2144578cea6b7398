# Copyright 2026 The ctqw Authors.
# MIT License (see LICENSE.md)

import dataclasses
import jsonschema
import numpy as np

from .utils import ResourceLimitError

MAX_DIMENSION = 4096

FAMILIES = ('cycle', 'path', 'complete', 'star', 'torus')

GRAPH_SPEC_SCHEMA = {
    'type': 'object',
    'properties': {
        'family': {'type': 'string', 'enum': list(FAMILIES)},
        'n': {'type': 'integer', 'minimum': 2},
        'd': {'type': 'integer', 'minimum': 1},
        'l': {'type': 'integer', 'minimum': 3},
    },
    'required': ['family'],
    'additionalProperties': False,
    'if': {'properties': {'family': {'const': 'torus'}}},
    'then': {'required': ['d', 'l']},
    'else': {'required': ['n']},
}


@dataclasses.dataclass(frozen=True)
class GraphSpec:
    '''
    One of the supported walk graphs. Vertex 0 is the walk origin.

    Parameters
    ----------
    family: str
        One of 'cycle', 'path', 'complete', 'star' or 'torus'.
    n: int
        Vertex count (cycle, path, complete, star). For a star, vertex 0 is
        the center and the other n - 1 vertices are leaves.
    d: int
        Torus dimension.
    l: int
        Torus side length; vertices are indexed row-major over coordinates.
    '''

    family: str
    n: int = None
    d: int = None
    l: int = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(
                f'`family` must be one of {FAMILIES}; received: {self.family}'
            )

        if self.family == 'torus':
            if self.d is None or self.l is None or self.n is not None:
                raise ValueError('A torus is specified by `d` and `l` only')
            if int(self.d) != self.d or self.d < 1:
                raise ValueError(f'`d` must be an integer >= 1; received: {self.d}')
            if int(self.l) != self.l or self.l < 3:
                raise ValueError(f'`l` must be an integer >= 3; received: {self.l}')
        else:
            if self.n is None or self.d is not None or self.l is not None:
                raise ValueError(f'A {self.family} is specified by `n` only')
            if int(self.n) != self.n or self.n < 2:
                raise ValueError(f'`n` must be an integer >= 2; received: {self.n}')

    @property
    def vertex_count(self):
        if self.family == 'torus':
            return self.l**self.d
        return self.n

    @property
    def shape(self):
        '''Coordinate shape of the vertex set.'''
        if self.family == 'torus':
            return (self.l,) * self.d
        return (self.n,)

    def __str__(self):
        if self.family == 'torus':
            return f'torus(d={self.d}, l={self.l})'
        return f'{self.family}({self.n})'


def cycle(n):
    return GraphSpec('cycle', n=n)


def path(n):
    return GraphSpec('path', n=n)


def complete(n):
    return GraphSpec('complete', n=n)


def star(n):
    return GraphSpec('star', n=n)


def torus(d, l):
    return GraphSpec('torus', d=d, l=l)


def graph_spec_from_json(obj):
    jsonschema.validate(obj, GRAPH_SPEC_SCHEMA)
    return GraphSpec(**obj)


def graph_spec_to_json(spec):
    return {
        k: v for k, v in dataclasses.asdict(spec).items() if v is not None
    }


def _check_vertex(spec, vertex):
    count = spec.vertex_count
    if not 0 <= vertex < count:
        raise IndexError(
            f'Vertex {vertex} out of range for {spec} ({count} vertices)'
        )


def coordinates(spec, vertex):
    '''Torus coordinates of a vertex (row-major, origin at index 0).'''
    _check_vertex(spec, vertex)
    return tuple(int(c) for c in np.unravel_index(vertex, spec.shape))


def vertex_index(spec, coords):
    '''Inverse of `coordinates`; coordinates wrap around periodically.'''
    if len(coords) != len(spec.shape):
        raise ValueError(
            f'Expected {len(spec.shape)} coordinates; received: {coords}'
        )
    coords = tuple(int(c) % s for c, s in zip(coords, spec.shape))
    return int(np.ravel_multi_index(coords, spec.shape))


def neighbors(spec, vertex):
    '''
    Sorted neighbor list of a vertex. The relation is symmetric and has no
    self-loops; a cycle of two vertices is a single edge.
    '''

    _check_vertex(spec, vertex)
    n = spec.vertex_count

    if spec.family == 'cycle':
        result = {(vertex - 1) % n, (vertex + 1) % n}
    elif spec.family == 'path':
        result = {v for v in (vertex - 1, vertex + 1) if 0 <= v < n}
    elif spec.family == 'complete':
        result = set(range(n))
    elif spec.family == 'star':
        result = set(range(1, n)) if vertex == 0 else {0}
    else:
        coords = coordinates(spec, vertex)
        result = set()
        for axis in range(spec.d):
            for step in (-1, 1):
                shifted = list(coords)
                shifted[axis] += step
                result.add(vertex_index(spec, shifted))

    result.discard(vertex)
    return sorted(result)


def adjacency_matrix(spec):
    n = spec.vertex_count
    if n > MAX_DIMENSION:
        raise ResourceLimitError(
            f'{spec} has {n} vertices; the dense limit is {MAX_DIMENSION}'
        )

    adjacency = np.zeros((n, n), dtype=np.float64)
    for a in range(n):
        adjacency[a, neighbors(spec, a)] = 1.0
    return adjacency


@dataclasses.dataclass(frozen=True, eq=False)
class Hamiltonian:
    '''
    Walk Hamiltonian <a|H|b>: -gamma for neighbors, deg(a) * gamma on the
    diagonal, 0 otherwise. Every row sums to zero.
    '''

    matrix: np.ndarray
    gamma: float = 1.0
    spec: GraphSpec = None

    @property
    def dimension(self):
        return self.matrix.shape[0]


def build_hamiltonian(spec, gamma=1.0):
    '''
    Builds the walk Hamiltonian of a graph.

    Parameters
    ----------
    spec: GraphSpec
        Graph to walk on.
    gamma: float
        Positive hopping rate.

    Returns
    -------
    Hamiltonian
        Read-only dense matrix of dimension `spec.vertex_count`.
    '''

    if not gamma > 0:
        raise ValueError(f'`gamma` must be positive; received: {gamma}')

    adjacency = adjacency_matrix(spec)
    matrix = gamma * (np.diag(adjacency.sum(axis=1)) - adjacency)
    matrix.flags.writeable = False
    return Hamiltonian(matrix=matrix, gamma=float(gamma), spec=spec)
