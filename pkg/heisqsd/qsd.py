# -*- coding: utf-8 -*-
"""The quantum state diffusion module

Euler-Maruyama integration of the normalized QSD equation and of its quasi-linear
(unnormalized) form, in the system space or in the doubled space, together with the
matrix element estimators built on the doubled-space trajectories.

States are arrays whose last axis is the Hilbert space; leading axes are a batch of
independent trajectories. A model of half the state length is lifted to the doubled
space automatically, expectation values are then taken over the whole theta.
"""
import logging
from collections import namedtuple

import numpy as np

from .commons import InstabilityError, Scheme, state_vector
from .ensemble import mean_and_error
from .hilbert import braket, extend_model
from .noise import NoiseStream, increment_blocks

__all__ = ['SdeConfig', 'Trajectory', 'step_normalized', 'step_quasilinear', 'matrix_element_samples',
           'estimate_matrix_element', 'propagate', 'grid_steps']

logger = logging.getLogger(__name__)

NORM_PRECONDITION = 1e-9
# Squared norms outside this window are treated as numerical blow-up
REPRESENTABLE_NORM_SQ = (1e-280, 1e280)

Trajectory = namedtuple('Trajectory', 'times states norm_history')
Trajectory.__doc__ = """States recorded at the grid nodes

states has shape (nodes, dim) for one trajectory or (nodes, batch, dim) for a batch.
norm_history holds the squared norm at each node before any renormalization.
"""


class SdeConfig(namedtuple('SdeConfig', 'dt scheme renormalize_each_step')):
    """Step size and integration scheme

    For the quasi-linear scheme the propagated state is never renormalized and
    renormalize_each_step has no effect on propagation.
    """
    __slots__ = ()

    def __new__(cls, dt=1e-3, scheme=Scheme.NORMALIZED, renormalize_each_step=True):
        if not dt > 0:
            raise ValueError('dt must be positive, got %r' % dt)

        return super().__new__(cls, float(dt), Scheme(scheme), bool(renormalize_each_step))


def _matching_model(model, length):
    if model.dim == length:
        return model
    if 2 * model.dim == length:
        return extend_model(model)

    raise ValueError('State of length %d does not fit a model of dimension %d' % (length, model.dim))


def _squared_norm(state):
    return np.sum(np.abs(state) ** 2, axis=-1)


def _apply(matrix, state):
    return state @ matrix.T


def _lindblad_action(model, state):
    """L_j state for every channel, shape (..., channels, dim)"""
    return np.einsum('cij,...j->...ci', model.stacked_lindblads, state)


def _normalized_increment(state, model, dt, increments):
    l_state = _lindblad_action(model, state)
    expectations = np.einsum('...i,...ci->...c', state.conj(), l_state)

    drift = (-1j * _apply(model.h, state)
             - 0.5 * _apply(model.decay, state)
             + np.einsum('...c,...ci->...i', expectations.conj(), l_state)
             - 0.5 * np.sum(np.abs(expectations) ** 2, axis=-1)[..., None] * state)
    noise = np.einsum('...c,...ci->...i', increments, l_state - expectations[..., None] * state[..., None, :])

    return drift * dt + noise


def _advance_normalized(state, model, dt, increments, renormalize=True):
    advanced = state + _normalized_increment(state, model, dt, increments)
    norm_sq = _squared_norm(advanced)
    if renormalize:
        advanced = advanced / np.sqrt(norm_sq)[..., None]

    return advanced, norm_sq


def _quasilinear_increment(state, model, dt, increments):
    l_state = _lindblad_action(model, state)
    adjoint_expectations = (np.einsum('...i,...ci->...c', state.conj(), l_state).conj()
                            / _squared_norm(state)[..., None])

    return (-1j * dt * _apply(model.h, state)
            + np.einsum('...c,...ci->...i', increments + adjoint_expectations * dt, l_state)
            - 0.5 * dt * _apply(model.decay, state))


def _advance_quasilinear(state, model, dt, increments):
    advanced = state + _quasilinear_increment(state, model, dt, increments)
    norm_sq = _squared_norm(advanced)

    low, high = REPRESENTABLE_NORM_SQ
    if not np.all(np.isfinite(norm_sq)) or np.any(norm_sq < low) or np.any(norm_sq > high):
        raise InstabilityError('Quasi-linear state norm left the representable range (squared norms %g..%g)'
                               % (np.nanmin(norm_sq), np.nanmax(norm_sq)))

    return advanced, norm_sq


@state_vector
def step_normalized(state, model, dt, increments):
    """One Euler-Maruyama step of the normalized QSD equation, renormalized afterwards"""
    if not dt > 0:
        raise ValueError('dt must be positive, got %r' % dt)

    model = _matching_model(model, state.shape[-1])
    deviation = np.max(np.abs(_squared_norm(state) - 1))
    if deviation > NORM_PRECONDITION:
        raise ValueError('State is not normalized (squared norm off by %g)' % deviation)

    advanced, _ = _advance_normalized(state, model, dt, np.asarray(increments, dtype=complex))

    return advanced


@state_vector
def step_quasilinear(state, model, dt, increments):
    """One Euler-Maruyama step of the quasi-linear QSD equation, no renormalization"""
    if not dt > 0:
        raise ValueError('dt must be positive, got %r' % dt)
    if np.any(_squared_norm(state) == 0):
        raise ValueError('The quasi-linear equation needs a nonzero state')

    model = _matching_model(model, state.shape[-1])
    advanced, _ = _advance_quasilinear(state, model, dt, np.asarray(increments, dtype=complex))

    return advanced


def _doubled_array(states):
    if isinstance(states, (list, tuple)):
        return np.array([state.vector if hasattr(state, 'vector') else state for state in states], dtype=complex)

    return np.asarray(states, dtype=complex)


def matrix_element_samples(states, operator, scheme=Scheme.NORMALIZED, weights=2.0):
    """Per-realization values of the matrix element estimator

    weights * <phi|A|psi> for the normalized scheme and weights * <phi^|A|psi^> / |theta^|^2
    for the quasi-linear one. The default weight 2 undoes the 1/sqrt(2) of theta_0.
    """
    states = _doubled_array(states)
    half = states.shape[-1] // 2
    values = braket(states[..., :half], operator, states[..., half:])
    if Scheme(scheme) is Scheme.QUASI_LINEAR:
        values = values / _squared_norm(states)

    return weights * values


def estimate_matrix_element(states, operator, scheme=Scheme.NORMALIZED):
    """Ensemble estimate of a Heisenberg matrix element at one time

    Returns (mean, standard error).
    """
    states = _doubled_array(states)
    if states.ndim != 2 or states.shape[0] < 2:
        raise ValueError('The estimator needs at least 2 samples, got %d'
                         % (states.shape[0] if states.ndim == 2 else 0))

    mean, error = mean_and_error(matrix_element_samples(states, operator, scheme=scheme))

    return complex(mean), float(error)


def grid_steps(t_grid, dt):
    """Number of dt steps between consecutive grid nodes"""
    t_grid = np.asarray(t_grid, dtype=float)
    intervals = np.diff(t_grid)
    if np.any(intervals <= 0):
        raise ValueError('The time grid is not strictly increasing')

    steps = np.rint(intervals / dt).astype(int)
    if np.any(np.abs(steps * dt - intervals) > 1e-9 * np.maximum(1.0, intervals)):
        raise ValueError('Grid nodes are not commensurate with dt=%g' % dt)

    return steps


def propagate(state0, model, config, stream, t_grid):
    """Integrate one trajectory, or a batch, recording the state at every grid node

    The first node is the time of state0. `stream` is a NoiseStream, or one stream per
    row for a batch of shape (batch, dim).
    """
    initial = np.array(state0.vector if hasattr(state0, 'vector') else state0, dtype=complex)
    single = initial.ndim == 1
    state = initial[None, :] if single else initial
    streams = [stream] if isinstance(stream, NoiseStream) else list(stream)
    if len(streams) != state.shape[0]:
        raise ValueError('%d noise streams for %d trajectories' % (len(streams), state.shape[0]))

    model = _matching_model(model, state.shape[-1])
    times = np.asarray(t_grid, dtype=float)
    steps = grid_steps(times, config.dt)
    quasi_linear = config.scheme is Scheme.QUASI_LINEAR

    if not quasi_linear and config.renormalize_each_step:
        deviation = np.max(np.abs(_squared_norm(state) - 1))
        if deviation > NORM_PRECONDITION:
            raise ValueError('Initial state is not normalized (squared norm off by %g)' % deviation)

    states = [state.copy()]
    norms = [_squared_norm(state)]
    norm_sq = norms[0]
    for n_steps in steps:
        for increments in increment_blocks(streams, model.n_channels, config.dt, n_steps):
            if quasi_linear:
                state, norm_sq = _advance_quasilinear(state, model, config.dt, increments)
            else:
                state, norm_sq = _advance_normalized(state, model, config.dt, increments,
                                                     renormalize=config.renormalize_each_step)
        states.append(state.copy())
        norms.append(norm_sq)

    states = np.array(states)
    norms = np.array(norms)
    if single:
        states, norms = states[:, 0], norms[:, 0]

    return Trajectory(times=times, states=states, norm_history=norms)
