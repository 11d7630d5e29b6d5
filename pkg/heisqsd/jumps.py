# -*- coding: utf-8 -*-
"""The quantum jump module

Piecewise deterministic (Monte Carlo wave function) unraveling of the master
equation, usable in the system space and in the doubled space.

Within a substep of length dt the jump probabilities are first order,
p_j = dt |L_j psi|^2. Every trajectory carries a survival clock: a uniform threshold
is drawn, the no-jump probabilities of the substeps are multiplied up, and a jump
happens in the substep where the product falls below the threshold. At a jump a
second uniform selects the channel and the next threshold is drawn, so a trajectory
consumes two uniforms per jump plus one opening threshold per propagated segment.

step_jump called without a clock is the per-substep form: it draws a fresh threshold,
so a single uniform decides whether that substep jumps, with probability sum_j p_j.
It costs one uniform without a jump and three with one (threshold, channel and the
next threshold, which is then discarded).

Between jumps the state follows exp(-i H_eff dt) with H_eff = H - (i/2) sum_j L_j^dagger L_j
and is renormalized.
"""
import logging
from collections import namedtuple

import numpy as np
from scipy import linalg

from . import correlations, qsd
from .commons import JumpProbabilityError, Scheme
from .noise import NoiseStream

__all__ = ['JumpConfig', 'JumpClock', 'JumpTrajectory', 'MAX_JUMP_PROBABILITY', 'step_jump', 'propagate_jumps',
           'jump_matrix_element', 'jump_correlate']

logger = logging.getLogger(__name__)

MAX_JUMP_PROBABILITY = 0.1

JumpTrajectory = namedtuple('JumpTrajectory', qsd.Trajectory._fields + ('jump_counts', 'first_jump_times'))


class JumpConfig(namedtuple('JumpConfig', 'dt')):
    __slots__ = ()

    def __new__(cls, dt=1e-3):
        if not dt > 0:
            raise ValueError('dt must be positive, got %r' % dt)

        return super().__new__(cls, float(dt))


class JumpClock(object):
    """Survival probability accumulated since the last jump and the threshold it is compared to"""
    def __init__(self, stream):
        self.survival = 1.0
        self.threshold = stream.uniform()


def _no_jump_propagator(model, dt):
    effective = model.h - 0.5j * model.decay
    return linalg.expm(-1j * dt * effective)


def _jump_substep(states, model, dt, no_jump, survival, thresholds, streams):
    """Advance a (batch, dim) array by one substep in place; returns the indices that jumped

    Only the total rate <psi|sum_j L_j^dagger L_j|psi> is needed for every row; the
    channel vectors L_j psi are formed for the rows that jump.
    """
    total = dt * np.sum(states.conj() * (states @ model.decay.T), axis=-1).real
    if np.any(total > MAX_JUMP_PROBABILITY):
        raise JumpProbabilityError('Jump probability %.3g per substep exceeds %g, reduce dt=%g'
                                   % (total.max(), MAX_JUMP_PROBABILITY, dt))

    survival *= 1.0 - total
    jumped = np.flatnonzero(survival < thresholds)
    before = states[jumped]

    evolved = states @ no_jump.T
    states[:] = evolved / np.linalg.norm(evolved, axis=-1, keepdims=True)

    for row, state in zip(jumped, before):
        stream = streams[row]
        l_state = model.stacked_lindblads @ state
        probabilities = np.sum(np.abs(l_state) ** 2, axis=-1)
        cumulative = np.cumsum(probabilities)
        channel = int(np.searchsorted(cumulative, stream.uniform() * cumulative[-1], side='right'))
        channel = min(channel, len(cumulative) - 1)
        while probabilities[channel] == 0:
            channel -= 1

        states[row] = l_state[channel] / np.linalg.norm(l_state[channel])
        thresholds[row] = stream.uniform()
        survival[row] = 1.0

    return jumped


def step_jump(state, model, dt, stream, clock=None):
    """One substep of the jump unraveling for a single normalized state

    Pass the trajectory's JumpClock to carry the survival threshold across substeps;
    without one a fresh threshold is drawn, which makes this substep jump with
    probability sum_j p_j.
    """
    wrap = getattr(type(state), 'from_vector', None)
    vector = np.array(state.vector if wrap else state, dtype=complex)
    if abs(np.vdot(vector, vector).real - 1) > qsd.NORM_PRECONDITION:
        raise ValueError('State is not normalized')

    model = qsd._matching_model(model, vector.size)
    clock = clock if clock is not None else JumpClock(stream)
    states = vector[None, :]
    survival = np.array([clock.survival])
    thresholds = np.array([clock.threshold])
    _jump_substep(states, model, dt, _no_jump_propagator(model, dt), survival, thresholds, [stream])
    clock.survival, clock.threshold = float(survival[0]), float(thresholds[0])

    return wrap(states[0]) if wrap else states[0]


def propagate_jumps(state0, model, config, stream, t_grid):
    """Jump counterpart of qsd.propagate; accepts any config with a `dt`

    Returns a JumpTrajectory, which also records the number of jumps and the time of
    the first jump (NaN when there was none) of every trajectory.
    """
    initial = np.array(state0.vector if hasattr(state0, 'vector') else state0, dtype=complex)
    single = initial.ndim == 1
    states = (initial[None, :] if single else initial).copy()
    streams = [stream] if isinstance(stream, NoiseStream) else list(stream)
    if len(streams) != states.shape[0]:
        raise ValueError('%d noise streams for %d trajectories' % (len(streams), states.shape[0]))

    deviation = np.max(np.abs(np.sum(np.abs(states) ** 2, axis=-1) - 1))
    if deviation > qsd.NORM_PRECONDITION:
        raise ValueError('Initial state is not normalized (squared norm off by %g)' % deviation)

    model = qsd._matching_model(model, states.shape[-1])
    times = np.asarray(t_grid, dtype=float)
    steps = qsd.grid_steps(times, config.dt)
    no_jump = _no_jump_propagator(model, config.dt)

    batch = states.shape[0]
    survival = np.ones(batch)
    thresholds = np.array([s.uniform() for s in streams])
    counts = np.zeros(batch, dtype=int)
    first_jump = np.full(batch, np.nan)

    recorded = [states.copy()]
    t = times[0]
    for n_steps in steps:
        for _ in range(n_steps):
            t += config.dt
            jumped = _jump_substep(states, model, config.dt, no_jump, survival, thresholds, streams)
            if jumped.size:
                counts[jumped] += 1
                fresh = jumped[np.isnan(first_jump[jumped])]
                first_jump[fresh] = t
        recorded.append(states.copy())

    recorded = np.array(recorded)
    norms = np.sum(np.abs(recorded) ** 2, axis=-1)
    logger.debug('%d jumps in %d trajectories', counts.sum(), batch)
    if single:
        recorded, norms = recorded[:, 0], norms[:, 0]

    return JumpTrajectory(times=times, states=recorded, norm_history=norms, jump_counts=counts,
                          first_jump_times=first_jump)


def jump_matrix_element(operator, phi0, psi0, model, t_grid, n_trajectories, config=None, seed=0, workers=1):
    """correlations.heisenberg_element with the jump unraveling"""
    config = config if config is not None else JumpConfig()
    return correlations.heisenberg_element(operator, phi0, psi0, model, t_grid, n_trajectories,
                                           sde=qsd.SdeConfig(dt=config.dt), seed=seed, workers=workers,
                                           propagator=propagate_jumps, method='jump')


def jump_correlate(request, model, seed=0, workers=1):
    """correlations.correlate with the jump unraveling"""
    if request.sde.scheme is not Scheme.NORMALIZED:
        request = request._replace(sde=qsd.SdeConfig(dt=request.sde.dt))

    return correlations.correlate(request, model, seed=seed, workers=workers, propagator=propagate_jumps,
                                  method='jump')
