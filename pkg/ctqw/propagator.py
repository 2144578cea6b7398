# Copyright 2026 The ctqw Authors.
# MIT License (see LICENSE.md)

'''
Return probability p0(t) = |<0|exp(-iHt)|0>|^2 by every available route.

Routes
------
- spectral: eigen-expansion |sum_n Q_n exp(-i E_n t)|^2 of any finite graph,
  with the spectrum from a dense symmetric eigensolver or, for circulant
  graphs (cycle, complete, torus), from the FFT of the Hamiltonian's first row.
- cyclic: closed cosine sums for the cycle. For N = 2n + 1,
      p0 = 1/N^2 + (4/N^2) sum_{k=1..n} sum_{j=0..n} cos(2 gamma t xi_kj),
      xi_kj = cos(2k pi/N) - cos(2j pi/N);
  for N = 2n,
      p0 = 1/(2n^2) + cos(4 gamma t)/(2n^2)
           + (1/n^2) sum_{j=0..n} sum_{k=1..n-1} cos(2 gamma t zeta_kj),
      zeta_kj = cos(k pi/n) - cos(j pi/n).
  Both follow from grouping the degenerate Fourier modes +k and -k; the
  general matrix-function formula for even circulants is not used.
- line / lattice: J0(2t)^2 on the integer line and J0(2t)^(2d) on Z^d.
- envelope: f(t) t^-alpha (or exp(-rate t)) models of graphs whose exact
  propagator is not implemented; used for recurrence classification only.
'''

import dataclasses
import numexpr
import numpy as np
import scipy.linalg

from .bessel import bessel_j, bessel_j_signed
from .graph import (
    GraphSpec,
    build_hamiltonian,
    graph_spec_from_json,
    graph_spec_to_json,
    neighbors,
)
from .utils import NumericalError, save_csv

MAX_LINE_ORDER = 64
DEGENERACY_TOLERANCE = 1e-12

_CHUNK_ELEMENTS = 2**22
_CIRCULANT_FAMILIES = ('cycle', 'complete', 'torus')


@dataclasses.dataclass(frozen=True, eq=False)
class SpectralForm:
    '''
    Energies E_n (ascending) and origin overlaps Q_n = |<0|q_n>|^2.
    Weights are renormalized to sum to one after validation.
    '''

    energies: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        energies = np.asarray(self.energies, dtype=np.float64)
        weights = np.asarray(self.weights, dtype=np.float64)

        if energies.shape != weights.shape or energies.ndim != 1:
            raise ValueError('Energies and weights must be 1D and equally long')
        if np.any(np.diff(energies) < 0):
            raise ValueError('Energies must be sorted in ascending order')
        if np.any(weights < -1e-14):
            raise ValueError('Weights must be non-negative')
        if abs(weights.sum() - 1.0) > 1e-10:
            raise ValueError(
                f'Weights must sum to one; received sum: {weights.sum()}'
            )

        weights = np.clip(weights, 0.0, None)
        weights = weights / weights.sum()
        for a in (energies, weights):
            a.flags.writeable = False

        object.__setattr__(self, 'energies', energies)
        object.__setattr__(self, 'weights', weights)

    def __len__(self):
        return len(self.energies)


def spectral_decompose(h):
    '''
    Eigen-decomposition of a walk Hamiltonian (LAPACK syev: Householder
    tridiagonalization followed by implicit QL/QR).

    Parameters
    ----------
    h: Hamiltonian
        Real symmetric Hamiltonian.

    Returns
    -------
    SpectralForm
        Energies and overlaps of the eigenvectors with vertex 0. Energies
        within DEGENERACY_TOLERANCE * |H| of each other form one eigenspace
        whose total overlap is split evenly between its members.
    '''

    try:
        energies, vectors = scipy.linalg.eigh(h.matrix, driver='ev')
    except (scipy.linalg.LinAlgError, ValueError) as e:
        raise NumericalError(
            f'Eigensolver failed for a {h.dimension}x{h.dimension} '
            f'Hamiltonian: {e}'
        ) from e

    weights = _split_degenerate(energies, vectors[0] ** 2)
    return SpectralForm(energies, weights)


def _split_degenerate(energies, weights, tolerance=DEGENERACY_TOLERANCE):
    # inside a degenerate eigenspace only the total overlap is basis
    # independent; it is shared evenly between the group members
    norm = max(1.0, float(np.abs(energies).max()))
    breaks = np.flatnonzero(np.diff(energies) > tolerance * norm) + 1
    starts = np.r_[0, breaks]
    totals = np.add.reduceat(weights, starts)
    sizes = np.diff(np.r_[starts, energies.size])
    return np.repeat(totals / sizes, sizes)


def fourier_spectral_form(spec, gamma=1.0):
    '''
    Spectrum of a circulant walk Hamiltonian (cycle, complete graph, torus).
    The eigenvalues are the discrete Fourier transform of the Hamiltonian's
    first row; all Fourier modes overlap equally (1/N) with the origin.
    '''

    if spec.family not in _CIRCULANT_FAMILIES:
        raise ValueError(
            f'{spec} is not circulant; use the dense spectral route instead'
        )
    if not gamma > 0:
        raise ValueError(f'`gamma` must be positive; received: {gamma}')

    if spec.family == 'torus':
        # origin row of a torus: built from the 2d axis neighbors only
        stencil = np.zeros(spec.shape)
        for axis in range(spec.d):
            for step in (1, -1):
                index = [0] * spec.d
                index[axis] = step
                stencil[tuple(index)] -= gamma
        stencil[(0,) * spec.d] = 2 * spec.d * gamma
    else:
        stencil = np.zeros(spec.vertex_count)
        adjacent = neighbors(spec, 0)
        stencil[adjacent] = -gamma
        stencil[0] = len(adjacent) * gamma

    energies = np.sort(np.fft.fftn(stencil).real.ravel())
    weights = np.full(energies.shape, 1.0 / energies.size)
    return SpectralForm(energies, weights)


def spectral_form(spec, gamma=1.0, method='auto'):
    '''
    Spectrum of a graph's walk Hamiltonian.

    Parameters
    ----------
    spec: GraphSpec
        Graph.
    gamma: float
        Hopping rate.
    method: str
        'dense', 'fourier', or 'auto' (Fourier for circulant graphs).
    '''

    if method not in ('auto', 'dense', 'fourier'):
        raise ValueError(
            f'`method` must be "auto", "dense" or "fourier"; received: {method}'
        )

    if method == 'fourier' or (
        method == 'auto' and spec.family in _CIRCULANT_FAMILIES
    ):
        return fourier_spectral_form(spec, gamma)

    return spectral_decompose(build_hamiltonian(spec, gamma))


def _as_times(t):
    t = np.asarray(t, dtype=np.float64)
    if np.isnan(t).any() or (t < 0).any():
        raise ValueError('Times must be non-negative')
    return t


def _restore(t, values):
    return float(values.reshape(())) if t.ndim == 0 else values.reshape(t.shape)


def spectral_p0(form, t):
    '''|sum_n Q_n exp(-i E_n t)|^2, vectorized over `t`.'''
    t = _as_times(t)
    flat = t.ravel()
    result = np.empty(flat.shape)
    energies, weights = form.energies, form.weights
    chunk = max(1, _CHUNK_ELEMENTS // len(form))

    for start in range(0, flat.size, chunk):
        phase = np.multiply.outer(flat[start : start + chunk], energies)
        re = numexpr.evaluate('cos(phase)') @ weights
        im = numexpr.evaluate('sin(phase)') @ weights
        result[start : start + chunk] = re * re + im * im

    result = np.where(flat == 0, 1.0, np.clip(result, 0.0, 1.0))
    return _restore(t, result)


def spectral_p0_double_sum(form, t):
    '''sum_{m,n} Q_m Q_n cos((E_m - E_n) t); O(N^2) reference form.'''
    t = _as_times(t)
    gaps = np.subtract.outer(form.energies, form.energies)
    pair_weights = np.multiply.outer(form.weights, form.weights)
    values = np.array(
        [np.sum(pair_weights * np.cos(gaps * s)) for s in t.ravel()]
    )
    return _restore(t, values)


def time_averaged_p0(form, tolerance=1e-9):
    '''
    Infinite-time average of p0: the sum over distinct energies of the
    squared total weight of each degenerate group.
    '''
    energies, weights = form.energies, form.weights
    scale = max(1.0, float(np.abs(energies).max()))
    breaks = np.flatnonzero(np.diff(energies) > tolerance * scale) + 1
    groups = np.add.reduceat(weights, np.r_[0, breaks])
    return float(np.sum(groups**2))


@dataclasses.dataclass(frozen=True)
class CyclicClosedForm:
    '''
    Closed-form return probability of the cycle with N = 2n + 1 ('odd') or
    N = 2n ('even') vertices.
    '''

    n: int
    parity: str
    gamma: float = 1.0

    def __post_init__(self):
        if self.parity not in ('odd', 'even'):
            raise ValueError(
                f'`parity` must be "odd" or "even"; received: {self.parity}'
            )
        minimum = 1 if self.parity == 'odd' else 2
        if int(self.n) != self.n or self.n < minimum:
            raise ValueError(
                f'`n` must be an integer >= {minimum} for {self.parity} '
                f'cycles; received: {self.n}'
            )
        if not self.gamma > 0:
            raise ValueError(f'`gamma` must be positive; received: {self.gamma}')

    @property
    def size(self):
        return 2 * self.n + 1 if self.parity == 'odd' else 2 * self.n

    @property
    def frequencies(self):
        '''xi_kj (odd) or zeta_kj (even), flattened over the summation range.'''
        n = self.n
        if self.parity == 'odd':
            c = np.cos(2 * np.pi * np.arange(n + 1) / (2 * n + 1))
            return np.subtract.outer(c[1:], c).ravel()
        c = np.cos(np.pi * np.arange(n + 1) / n)
        return np.subtract.outer(c[1:n], c).ravel()


def cyclic_closed_form(size, gamma=1.0):
    '''Closed form of the cycle with `size` >= 3 vertices.'''
    if int(size) != size or size < 3:
        raise ValueError(f'`size` must be an integer >= 3; received: {size}')
    if size % 2:
        return CyclicClosedForm((size - 1) // 2, 'odd', gamma)
    return CyclicClosedForm(size // 2, 'even', gamma)


def cyclic_p0(form, t):
    '''Return probability of the cycle from its closed cosine sum.'''
    t = _as_times(t)
    flat = t.ravel()
    n, gamma = form.n, form.gamma
    frequencies = form.frequencies
    result = np.empty(flat.shape)
    chunk = max(1, _CHUNK_ELEMENTS // max(1, frequencies.size))

    for start in range(0, flat.size, chunk):
        s = flat[start : start + chunk]
        phase = np.multiply.outer(2 * gamma * s, frequencies)
        total = numexpr.evaluate('sum(cos(phase), axis=1)')

        if form.parity == 'odd':
            size = 2 * n + 1
            value = (1.0 + 4.0 * total) / size**2
        else:
            value = (1.0 + np.cos(4 * gamma * s)) / (2 * n * n) + total / (n * n)

        result[start : start + chunk] = value

    result = np.where(flat == 0, 1.0, np.clip(result, 0.0, 1.0))
    return _restore(t, result)


def line_amplitude(k, j, t):
    '''
    <k|exp(-iHt)|j> = i^(k-j) exp(-2it) J_{k-j}(2t) on the integer line.
    '''
    m = int(k) - int(j)
    if abs(m) > MAX_LINE_ORDER:
        raise ValueError(
            f'|k - j| must not exceed {MAX_LINE_ORDER}; received: {abs(m)}'
        )
    t = _as_times(t)
    amplitude = 1j ** (m % 4) * np.exp(-2j * t) * bessel_j_signed(m, 2 * t)
    return complex(amplitude) if t.ndim == 0 else amplitude


def line_p0(t, site=0):
    '''Probability of finding the line walker on `site` at time t.'''
    t = _as_times(t)
    value = bessel_j(abs(int(site)), 2 * t) ** 2
    return value


def envelope_p0(
    alpha, t, modulation='constant', scale=1.0, decay='power', rate=None
):
    '''
    Asymptotic envelope model of a return probability.

    Parameters
    ----------
    alpha: float
        Power-law exponent (ignored for exponential decay).
    t: float or array_like
        Times; t = 0 returns 1.
    modulation: str
        'constant' or 'cosine_squared' (cos^2(2t - pi/4), the line's phase).
    scale: float
        Prefactor.
    decay: str
        'power' for scale * m(t) * t^-alpha, 'exponential' for
        scale * exp(-rate t).
    rate: float
        Exponential decay rate.

    Returns
    -------
    float or ndarray
        Values clamped to [0, 1].
    '''

    t = _as_times(t)
    s = np.atleast_1d(t)
    positive = np.where(s > 0, s, 1.0)

    if decay == 'exponential':
        value = numexpr.evaluate(
            'scale * exp(-rate * s)',
            local_dict={'scale': float(scale), 'rate': float(rate), 's': s},
        )
    else:
        value = numexpr.evaluate(
            'scale * s ** (-alpha)',
            local_dict={'scale': float(scale), 'alpha': float(alpha), 's': positive},
        )
        if modulation == 'cosine_squared':
            value = value * np.cos(2 * s - np.pi / 4) ** 2

    value = np.where(s == 0, 1.0, np.clip(value, 0.0, 1.0))
    return _restore(t, value)


@dataclasses.dataclass(frozen=True, eq=False)
class SpectralModel:
    form: SpectralForm
    graph: GraphSpec = None
    gamma: float = 1.0
    method: str = 'auto'
    kind = 'spectral'

    def p0(self, t):
        return spectral_p0(self.form, t)

    def to_json(self):
        if self.graph is None:
            return {
                'kind': self.kind,
                'energies': self.form.energies,
                'weights': self.form.weights,
            }
        return {
            'kind': self.kind,
            'graph': graph_spec_to_json(self.graph),
            'gamma': self.gamma,
            'method': self.method,
        }


@dataclasses.dataclass(frozen=True)
class CyclicModel:
    form: CyclicClosedForm
    kind = 'cyclic'

    def p0(self, t):
        return cyclic_p0(self.form, t)

    def to_json(self):
        return {'kind': self.kind, 'size': self.form.size, 'gamma': self.form.gamma}


@dataclasses.dataclass(frozen=True)
class LineBesselModel:
    kind = 'line'

    def p0(self, t):
        return line_p0(t)

    def to_json(self):
        return {'kind': self.kind}


@dataclasses.dataclass(frozen=True)
class LatticeBesselModel:
    d: int
    kind = 'lattice'

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f'`d` must be an integer >= 1; received: {self.d}')

    def p0(self, t):
        return line_p0(t) ** self.d

    def to_json(self):
        return {'kind': self.kind, 'd': self.d}


@dataclasses.dataclass(frozen=True)
class EnvelopeModel:
    '''Envelope model; never an exact propagator.'''

    alpha: float = None
    modulation: str = 'constant'
    scale: float = 1.0
    decay: str = 'power'
    rate: float = None
    kind = 'envelope'

    def __post_init__(self):
        if self.modulation not in ('constant', 'cosine_squared'):
            raise ValueError(
                '`modulation` must be "constant" or "cosine_squared"; '
                f'received: {self.modulation}'
            )
        if not self.scale > 0:
            raise ValueError(f'`scale` must be positive; received: {self.scale}')
        if self.decay == 'power':
            if self.alpha is None or not self.alpha > 0:
                raise ValueError(
                    f'`alpha` must be positive; received: {self.alpha}'
                )
        elif self.decay == 'exponential':
            if self.rate is None or not self.rate > 0:
                raise ValueError(f'`rate` must be positive; received: {self.rate}')
        else:
            raise ValueError(
                f'`decay` must be "power" or "exponential"; received: {self.decay}'
            )

    def p0(self, t):
        return envelope_p0(
            self.alpha, t, self.modulation, self.scale, self.decay, self.rate
        )

    def to_json(self):
        return {
            'kind': self.kind,
            'alpha': self.alpha,
            'modulation': self.modulation,
            'scale': self.scale,
            'decay': self.decay,
            'rate': self.rate,
        }


@dataclasses.dataclass(frozen=True)
class ConstantModel:
    '''p0(t) = value for t > 0, 1 at t = 0.'''

    value: float
    kind = 'constant'

    def __post_init__(self):
        if not 0 <= self.value <= 1:
            raise ValueError(f'`value` must be in [0, 1]; received: {self.value}')

    def p0(self, t):
        t = _as_times(t)
        value = np.where(t == 0, 1.0, self.value)
        return float(value) if t.ndim == 0 else value

    def to_json(self):
        return {'kind': self.kind, 'value': self.value}


# graphs of the recurrence discussion whose propagators are only known
# through their asymptotics
ENVELOPE_PRESETS = {
    'honeycomb': EnvelopeModel(alpha=2.0),
    'spidernet': EnvelopeModel(alpha=3.0),
    'hermite': EnvelopeModel(decay='exponential', rate=1.0),
}


def p0(model, t):
    '''
    Return probability of a model at time(s) t.

    Parameters
    ----------
    model: SpectralModel, CyclicModel, LineBesselModel, LatticeBesselModel,
           EnvelopeModel or ConstantModel
        Route to evaluate.
    t: float or array_like
        Non-negative times.

    Returns
    -------
    float or ndarray
        Probabilities in [0, 1].
    '''

    return model.p0(t)


def spectral_model(spec, gamma=1.0, method='auto'):
    return SpectralModel(
        spectral_form(spec, gamma, method), graph=spec, gamma=gamma, method=method
    )


def model_from_json(obj):
    '''Rebuilds a model from the descriptor produced by `model.to_json()`.'''
    kind = obj.get('kind')

    if kind == 'spectral':
        if 'graph' in obj:
            return spectral_model(
                graph_spec_from_json(obj['graph']),
                obj.get('gamma', 1.0),
                obj.get('method', 'auto'),
            )
        return SpectralModel(SpectralForm(obj['energies'], obj['weights']))
    if kind == 'cyclic':
        return CyclicModel(cyclic_closed_form(obj['size'], obj.get('gamma', 1.0)))
    if kind == 'line':
        return LineBesselModel()
    if kind == 'lattice':
        return LatticeBesselModel(obj['d'])
    if kind == 'envelope':
        return EnvelopeModel(
            alpha=obj.get('alpha'),
            modulation=obj.get('modulation', 'constant'),
            scale=obj.get('scale', 1.0),
            decay=obj.get('decay', 'power'),
            rate=obj.get('rate'),
        )
    if kind == 'constant':
        return ConstantModel(obj['value'])

    raise ValueError(f'Unknown model kind: {kind}')


def save_p0_trace(filename, times, values):
    '''CSV trace with columns (t, p0).'''
    save_csv(filename, ['t', 'p0'], [times, values])
