# -*- coding: utf-8 -*-
"""The correlations module

Heisenberg picture matrix elements and two-time correlation functions computed from
trajectories in the doubled Hilbert space.

Both pipelines take a `propagator` with the signature of qsd.propagate; the default is
quantum state diffusion, jumps.propagate_jumps substitutes the jump unraveling.
"""
import logging
from collections import namedtuple

import numpy as np

from . import qsd
from .commons import Scheme
from .ensemble import run_ensemble
from .hilbert import Ket, make_theta, random_ket

__all__ = ['STEADY_STATE', 'RANDOM_UNIFORM', 'DEFAULT_WARMUP', 'CorrelationRequest', 'prepare_initial',
           'heisenberg_element', 'correlation_samples', 'correlate']

logger = logging.getLogger(__name__)

STEADY_STATE = 'steady_state'
RANDOM_UNIFORM = 'random_uniform'
DEFAULT_WARMUP = 30.0


def _entries(operator):
    return operator.entries if hasattr(operator, 'entries') else np.asarray(operator, dtype=complex)


class CorrelationRequest(namedtuple('CorrelationRequest',
                                    'operator_a operator_b t tau_grid n_trajectories initial sde warmup_time')):
    """g(t, t + tau) = <A(t + tau) B(t)> requested on a grid of delays

    `initial` is a Ket, STEADY_STATE or RANDOM_UNIFORM. warmup_time defaults to
    DEFAULT_WARMUP for STEADY_STATE and to 0 otherwise.
    """
    __slots__ = ()

    def __new__(cls, operator_a, operator_b, t, tau_grid, n_trajectories, initial=STEADY_STATE, sde=None,
                warmup_time=None):
        tau_grid = np.asarray(tau_grid, dtype=float)
        if tau_grid.ndim != 1 or tau_grid.size < 1:
            raise ValueError('tau_grid needs at least one delay')
        if tau_grid[0] < 0 or np.any(np.diff(tau_grid) <= 0):
            raise ValueError('tau_grid must be nonnegative and increasing')
        if n_trajectories < 2:
            raise ValueError('n_trajectories must be at least 2, got %d' % n_trajectories)
        if t < 0:
            raise ValueError('t must be nonnegative, got %r' % t)
        if not isinstance(initial, Ket) and initial not in (STEADY_STATE, RANDOM_UNIFORM):
            raise ValueError('Unknown initial condition %r' % (initial,))

        if warmup_time is None:
            warmup_time = DEFAULT_WARMUP if initial == STEADY_STATE else 0.0
        if warmup_time < 0:
            raise ValueError('warmup_time must be nonnegative, got %r' % warmup_time)

        return super().__new__(cls, operator_a, operator_b, float(t), tau_grid, int(n_trajectories), initial,
                               sde if sde is not None else qsd.SdeConfig(), float(warmup_time))


def _system_config(sde):
    """Segments in the system space always integrate the normalized equation"""
    return qsd.SdeConfig(dt=sde.dt, scheme=Scheme.NORMALIZED, renormalize_each_step=True)


def _advance(states, model, sde, streams, duration, propagator):
    if duration <= 0:
        return states

    return propagator(states, model, _system_config(sde), streams, [0.0, duration]).states[-1]


def prepare_initial(initial, model, warmup_time=None, sde=None, stream=None, propagator=qsd.propagate):
    """The state a trajectory starts from

    A Ket is returned unchanged. RANDOM_UNIFORM draws a Haar-uniform ket from each
    stream and propagates it for warmup_time; STEADY_STATE does the same with the
    warmup defaulting to DEFAULT_WARMUP. Returns a Ket for a single stream, a
    (batch, dim) array for a list of streams.
    """
    if isinstance(initial, Ket):
        return initial

    if initial not in (STEADY_STATE, RANDOM_UNIFORM):
        raise ValueError('Unknown initial condition %r' % (initial,))
    if warmup_time is None:
        warmup_time = DEFAULT_WARMUP if initial == STEADY_STATE else 0.0
    if warmup_time < 0:
        raise ValueError('warmup_time must be nonnegative, got %r' % warmup_time)

    sde = sde if sde is not None else qsd.SdeConfig()
    single = not isinstance(stream, (list, tuple))
    streams = [stream] if single else list(stream)

    states = np.array([random_ket(model.dim, s).amplitudes for s in streams])
    states = _advance(states, model, sde, streams, warmup_time, propagator)

    return Ket(states[0]) if single else states


def _with_origin(grid):
    """Prepend t = 0 when the grid does not start there; returns (nodes, number of prepended nodes)"""
    grid = np.asarray(grid, dtype=float)
    if grid[0] == 0:
        return grid, 0

    return np.concatenate([[0.0], grid]), 1


def heisenberg_element(operator, phi0, psi0, model, t_grid, n_trajectories, sde=None, seed=0, workers=1,
                       propagator=qsd.propagate, method='qsd'):
    """<phi0| A(t) |psi0> on t_grid, estimated from doubled-space trajectories

    Returns an EnsembleResult over t_grid.
    """
    sde = sde if sde is not None else qsd.SdeConfig()
    theta0 = make_theta(phi0, psi0).vector
    nodes, skipped = _with_origin(t_grid)

    def task(streams):
        batch = np.tile(theta0, (len(streams), 1))
        trajectory = propagator(batch, model, sde, streams, nodes)
        values = qsd.matrix_element_samples(trajectory.states[skipped:], operator, scheme=sde.scheme)

        return values.T

    return run_ensemble(task, n_trajectories, seed=seed, workers=workers, grid=t_grid, method=method)


def correlation_samples(request, model, streams, propagator=qsd.propagate):
    """Per-realization values w <phi_{t+tau}|A|psi_{t+tau}>, shape (len(streams), len(tau_grid))"""
    sde = request.sde
    initial = request.initial
    if isinstance(initial, Ket):
        states = np.tile(initial.amplitudes, (len(streams), 1))
    else:
        states = prepare_initial(initial, model, request.warmup_time, sde, list(streams), propagator=propagator)

    states = _advance(states, model, sde, streams, request.t, propagator)

    b_states = states @ _entries(request.operator_b).T
    weights = 1.0 + np.sum(np.abs(b_states) ** 2, axis=-1)
    theta = np.concatenate([states, b_states], axis=-1) / np.sqrt(weights)[:, None]
    if not np.allclose(np.sum(np.abs(theta) ** 2, axis=-1), 1.0, rtol=0, atol=1e-12):
        raise ArithmeticError('Doubled state built at time t is not normalized')

    nodes, skipped = _with_origin(request.tau_grid)
    trajectory = propagator(theta, model, sde, streams, nodes)
    values = qsd.matrix_element_samples(trajectory.states[skipped:], request.operator_a, scheme=sde.scheme,
                                        weights=weights)

    return values.T


def correlate(request, model, seed=0, workers=1, propagator=qsd.propagate, method='qsd'):
    """g(t, t + tau) = E[(1 + |B psi_t|^2) <phi_{t+tau}|A|psi_{t+tau}>] over request.tau_grid

    Each trajectory propagates psi to t in the system space, continues as
    theta_t = (psi_t, B psi_t) / sqrt(1 + |B psi_t|^2) in the doubled space, and uses
    fresh noise on both segments. Returns an EnsembleResult over the delays.
    """
    def task(streams):
        return correlation_samples(request, model, streams, propagator=propagator)

    return run_ensemble(task, request.n_trajectories, seed=seed, workers=workers, grid=request.tau_grid,
                        method=method)
