# -*- coding: utf-8 -*-
"""The coupled pair module

Matrix elements from a pair (psi, phi) driven by the same complex noise, with
coefficients l_j(a, b) = <a|L_j|b> / <a|b> that keep <phi|psi> constant in the
continuum. Correct in the mean, this scheme is unstable in practice; the module
exists to measure that.

Two variants:

* unity preserving: the coupled equations with the compensation terms that conserve
  <phi|psi> for every realization;
* quasi linear: the same equations without the terms proportional to the state,
  dpsi = -iH psi dt + sum_j L_j psi (dxi_j + l_j(psi, phi)^* dt) - 1/2 sum_j L_j^dagger L_j psi dt
  and symmetrically for phi with l_j(phi, psi)^*. The dropped terms only rescale psi
  and phi, so <phi|A|psi> <phi_0|psi_0> / <phi|psi> gives the same estimate.

Realizations whose |<phi|psi>| falls below a floor, or whose state leaves the
representable range, are aborted and counted; they are never regularized.
"""
import logging
from collections import namedtuple

import numpy as np

from .commons import GisinVariant, InstabilityError, RealizationAborted
from .ensemble import TaskOutput, run_ensemble
from .hilbert import Ket, braket
from .noise import NoiseStream, increment_blocks
from .qsd import REPRESENTABLE_NORM_SQ, grid_steps

__all__ = ['DEFAULT_FLOOR', 'CoupledPair', 'PairTrajectory', 'InstabilityReport', 'step_coupled',
           'step_coupled_quasilinear', 'propagate_pairs', 'gisin_element', 'instability_report']

logger = logging.getLogger(__name__)

DEFAULT_FLOOR = 1e-12

PairTrajectory = namedtuple('PairTrajectory', 'times psi phi scalar_products aborted')


class CoupledPair(object):
    """The pair (psi, phi) with the history of its scalar product <phi|psi>"""
    def __init__(self, psi, phi, scalar_product_history=None):
        psi = psi if isinstance(psi, Ket) else Ket(psi)
        phi = phi if isinstance(phi, Ket) else Ket(phi)
        if psi.dim != phi.dim:
            raise ValueError('psi and phi differ in dimension: %d != %d' % (psi.dim, phi.dim))

        self._psi = psi
        self._phi = phi
        if scalar_product_history is None:
            scalar_product_history = [self.scalar_product]
        self._history = tuple(complex(value) for value in scalar_product_history)

    @property
    def psi(self):
        return self._psi

    @property
    def phi(self):
        return self._phi

    @property
    def scalar_product(self):
        """<phi|psi>"""
        return complex(np.vdot(self._phi.amplitudes, self._psi.amplitudes))

    @property
    def scalar_product_history(self):
        return self._history

    def __repr__(self):
        return 'CoupledPair(psi=%r, phi=%r)' % (self._psi, self._phi)


def _coefficients(model, left, right):
    """l_j(left, right) for every channel, shape (..., channels)"""
    numerators = np.einsum('...i,cij,...j->...c', left.conj(), model.stacked_lindblads, right)
    return numerators / np.sum(left.conj() * right, axis=-1)[..., None]


def _apply(matrix, state):
    return state @ matrix.T


def _unity_preserving_increments(psi, phi, model, dt, increments):
    l_psi_phi = _coefficients(model, psi, phi)
    l_phi_psi = _coefficients(model, phi, psi)
    l_on_psi = np.einsum('cij,...j->...ci', model.stacked_lindblads, psi)
    l_on_phi = np.einsum('cij,...j->...ci', model.stacked_lindblads, phi)

    def increment(state, l_state, own, other):
        # own = l_j(other, state) multiplies the noise, other = l_j(state, other)
        drift = (-1j * _apply(model.h, state)
                 + np.einsum('...c,...ci->...i', other.conj(), l_state)
                 - 0.5 * _apply(model.decay, state)
                 - 0.5 * np.sum(own * other.conj(), axis=-1)[..., None] * state)
        noise = np.einsum('...c,...ci->...i', increments, l_state - own[..., None] * state[..., None, :])
        return drift * dt + noise

    return (increment(psi, l_on_psi, l_phi_psi, l_psi_phi),
            increment(phi, l_on_phi, l_psi_phi, l_phi_psi))


def _quasilinear_increments(psi, phi, model, dt, increments):
    l_psi_phi = _coefficients(model, psi, phi)
    l_phi_psi = _coefficients(model, phi, psi)

    def increment(state, other):
        l_state = np.einsum('cij,...j->...ci', model.stacked_lindblads, state)
        return (-1j * dt * _apply(model.h, state)
                + np.einsum('...c,...ci->...i', increments + other.conj() * dt, l_state)
                - 0.5 * dt * _apply(model.decay, state))

    return increment(psi, l_psi_phi), increment(phi, l_phi_psi)


def _unstable(psi, phi, floor):
    """Rows whose scalar product vanished or whose state left the representable range"""
    scalar = np.abs(np.sum(phi.conj() * psi, axis=-1))
    norms = np.sum(np.abs(psi) ** 2, axis=-1) * np.sum(np.abs(phi) ** 2, axis=-1)
    low, high = REPRESENTABLE_NORM_SQ
    with np.errstate(invalid='ignore', over='ignore'):
        return ~np.isfinite(norms) | (norms < low) | (norms > high) | ~(scalar >= floor * np.sqrt(norms))


def _step_pair(pair, model, dt, increments, variant, floor):
    if not dt > 0:
        raise ValueError('dt must be positive, got %r' % dt)
    if abs(pair.scalar_product) < floor:
        raise RealizationAborted('|<phi|psi>| = %g is below the floor %g' % (abs(pair.scalar_product), floor))

    advance = _unity_preserving_increments if variant is GisinVariant.UNITY_PRESERVING else _quasilinear_increments
    psi, phi = pair.psi.amplitudes, pair.phi.amplitudes
    d_psi, d_phi = advance(psi, phi, model, dt, np.asarray(increments, dtype=complex))
    psi, phi = psi + d_psi, phi + d_phi

    if _unstable(psi, phi, floor):
        raise InstabilityError('Coupled pair became unstable')

    scalar_product = complex(np.vdot(phi, psi))
    return CoupledPair(psi, phi, pair.scalar_product_history + (scalar_product,))


def step_coupled(pair, model, dt, increments, floor=DEFAULT_FLOOR):
    """One Euler-Maruyama step of the unity-preserving pair, both driven by the same increments"""
    return _step_pair(pair, model, dt, increments, GisinVariant.UNITY_PRESERVING, floor)


def step_coupled_quasilinear(pair, model, dt, increments, floor=DEFAULT_FLOOR):
    """One Euler-Maruyama step of the quasi-linear pair"""
    if pair.psi.norm == 0 or pair.phi.norm == 0:
        raise ValueError('The quasi-linear pair needs nonzero states')

    return _step_pair(pair, model, dt, increments, GisinVariant.QUASI_LINEAR, floor)


def propagate_pairs(psi0, phi0, model, dt, stream, t_grid, variant=GisinVariant.QUASI_LINEAR,
                    floor=DEFAULT_FLOOR):
    """Integrate a batch of pairs, recording both states and <phi|psi> at the grid nodes

    Aborted rows are frozen from the step they failed and flagged in `aborted`.
    """
    variant = GisinVariant(variant)
    psi = np.array(psi0.vector if hasattr(psi0, 'vector') else psi0, dtype=complex)
    phi = np.array(phi0.vector if hasattr(phi0, 'vector') else phi0, dtype=complex)
    streams = [stream] if isinstance(stream, NoiseStream) else list(stream)
    if psi.ndim == 1:
        psi = np.tile(psi, (len(streams), 1))
        phi = np.tile(phi, (len(streams), 1))
    if psi.shape != phi.shape or psi.shape[0] != len(streams):
        raise ValueError('psi %s, phi %s and %d streams do not match' % (psi.shape, phi.shape, len(streams)))

    times = np.asarray(t_grid, dtype=float)
    steps = grid_steps(times, dt)
    advance = _unity_preserving_increments if variant is GisinVariant.UNITY_PRESERVING else _quasilinear_increments

    aborted = _unstable(psi, phi, floor)
    psi_nodes, phi_nodes = [psi.copy()], [phi.copy()]
    for n_steps in steps:
        for increments in increment_blocks(streams, model.n_channels, dt, n_steps):
            active = ~aborted
            if not active.any():
                continue

            d_psi, d_phi = advance(psi[active], phi[active], model, dt, increments[active])
            psi[active] += d_psi
            phi[active] += d_phi
            aborted[active] = _unstable(psi[active], phi[active], floor)
        psi_nodes.append(psi.copy())
        phi_nodes.append(phi.copy())

    psi_nodes, phi_nodes = np.array(psi_nodes), np.array(phi_nodes)
    if aborted.any():
        logger.warning('%d of %d %s pairs aborted', aborted.sum(), aborted.size, variant.value)

    return PairTrajectory(times=times, psi=psi_nodes, phi=phi_nodes,
                          scalar_products=np.sum(phi_nodes.conj() * psi_nodes, axis=-1), aborted=aborted)


def gisin_element(operator, phi0, psi0, model, t_grid, n_trajectories, dt=1e-3,
                  variant=GisinVariant.QUASI_LINEAR, seed=0, workers=1, floor=DEFAULT_FLOOR):
    """<phi0| A(t) |psi0> from the coupled pair scheme, as an EnsembleResult over t_grid

    Diagnostics per trajectory: `aborted` and `scalar_drift`, the largest deviation of
    <phi|psi> from its initial value over the grid.
    """
    variant = GisinVariant(variant)
    phi0 = phi0 if isinstance(phi0, Ket) else Ket(phi0)
    psi0 = psi0 if isinstance(psi0, Ket) else Ket(psi0)
    initial_product = complex(np.vdot(phi0.amplitudes, psi0.amplitudes))

    grid = np.asarray(t_grid, dtype=float)
    nodes, skipped = (grid, 0) if grid[0] == 0 else (np.concatenate([[0.0], grid]), 1)

    def task(streams):
        pairs = propagate_pairs(psi0, phi0, model, dt, streams, nodes, variant=variant, floor=floor)
        with np.errstate(invalid='ignore', over='ignore', divide='ignore'):
            values = braket(pairs.phi, operator, pairs.psi)
            if variant is GisinVariant.QUASI_LINEAR:
                values = values * initial_product / pairs.scalar_products
            drift = np.max(np.abs(pairs.scalar_products - initial_product), axis=0)

        values = values[skipped:].T
        values[pairs.aborted] = np.nan
        drift[pairs.aborted] = np.nan

        return TaskOutput(values=values, diagnostics={'aborted': pairs.aborted, 'scalar_drift': drift})

    return run_ensemble(task, n_trajectories, seed=seed, workers=workers, grid=grid, method='gisin-%s' % variant.value)


class InstabilityReport(namedtuple('InstabilityReport', 'method grid variance n n_aborted max_scalar_drift')):
    __slots__ = ()

    def to_dict(self):
        return {'method': self.method,
                'grid': [float(t) for t in self.grid],
                'variance': [float(v) for v in self.variance],
                'n': int(self.n),
                'n_aborted': int(self.n_aborted),
                'max_scalar_drift': float(self.max_scalar_drift)}


def instability_report(result):
    """Per-node sample variance, aborted count and largest scalar product drift of an ensemble

    The variance counts real and imaginary parts together. Works for any EnsembleResult;
    without a `scalar_drift` diagnostic the drift is reported as 0.
    """
    samples = np.asarray(result.samples)
    if samples.shape[0] < 1:
        raise ValueError('The report needs at least one realization')

    kept = samples[~np.all(np.isnan(samples), axis=1)]
    if kept.shape[0] > 1:
        variance = np.var(kept.real, axis=0, ddof=1) + np.var(kept.imag, axis=0, ddof=1)
    else:
        variance = np.zeros(samples.shape[1])

    drift = np.asarray(result.diagnostics.get('scalar_drift', [0.0]), dtype=float)
    max_drift = float(np.nanmax(drift)) if np.any(np.isfinite(drift)) else 0.0

    return InstabilityReport(method=result.method, grid=np.asarray(result.grid), variance=variance, n=result.n,
                             n_aborted=result.n_aborted, max_scalar_drift=max_drift)
