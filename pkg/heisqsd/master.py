# -*- coding: utf-8 -*-
"""The master equation module

Deterministic dense integration of the Lindblad master equation and of its extension
to the doubled space. This is the reference every stochastic estimate is checked
against: regression-theorem matrix elements, two-time correlations, steady states.

Density matrices are vectorized by stacking columns, vec(A rho B) = (B^T kron A) vec(rho).
"""
import logging
import math

import numpy as np
from scipy import linalg

from .commons import DegenerateSteadyStateError
from .hilbert import DensityMatrix, Ket, extend_model, make_theta, projector

__all__ = ['DensityMatrix', 'Liouvillian', 'build_liouvillian', 'lindblad_rhs', 'evolve',
           'regression_matrix_element', 'doubled_evolution', 'doubled_block_evolution',
           'doubled_matrix_element', 'oracle_two_time', 'steady_state', 'expectation',
           'analytic_decay_element']

logger = logging.getLogger(__name__)

DEFAULT_H_ODE = 1e-3


def vectorize(matrix):
    return np.asarray(matrix).reshape(-1, order='F')


def unvectorize(vector, dim):
    return np.asarray(vector).reshape(dim, dim, order='F')


class Liouvillian(object):
    """The generator of the master equation acting on vectorized density matrices"""
    def __init__(self, matrix, dim):
        matrix = np.array(matrix, dtype=complex)
        if matrix.shape != (dim * dim, dim * dim):
            raise ValueError('Liouvillian of a %d-level system needs shape %s, got %s'
                             % (dim, (dim * dim, dim * dim), matrix.shape))

        matrix.setflags(write=False)
        self._matrix = matrix
        self._dim = dim

    @property
    def matrix(self):
        return self._matrix

    @property
    def dim(self):
        """Dimension of the Hilbert space, not of the superoperator"""
        return self._dim

    def apply(self, rho):
        """The right-hand side of the master equation for one density matrix"""
        rho = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho)
        return unvectorize(self._matrix @ vectorize(rho), self._dim)


def build_liouvillian(model):
    dim = model.dim
    identity = np.eye(dim)
    h = model.h

    matrix = -1j * (np.kron(identity, h) - np.kron(h.T, identity))
    for L in model.stacked_lindblads:
        matrix += np.kron(L.conj(), L)
    matrix -= 0.5 * (np.kron(identity, model.decay) + np.kron(model.decay.T, identity))

    return Liouvillian(matrix, dim)


def lindblad_rhs(model, rho):
    """Evaluate the master equation right-hand side from commutator and dissipator directly"""
    rho = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho)
    rhs = -1j * (model.h @ rho - rho @ model.h)
    for L in model.stacked_lindblads:
        rhs += L @ rho @ L.conj().T
    rhs -= 0.5 * (model.decay @ rho + rho @ model.decay)

    return rhs


def _rk4_propagator(matrix, h):
    """One classical Runge-Kutta step for dv/dt = M v, written as a matrix"""
    step = h * matrix
    power = np.eye(matrix.shape[0], dtype=complex)
    propagator = power.copy()
    for order in range(1, 5):
        power = power @ step / order
        propagator += power

    return propagator


def _check_grid(t_grid):
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < 1:
        raise ValueError('The time grid needs at least one node')
    if np.any(np.diff(t_grid) < 0):
        raise ValueError('The time grid is not monotone')

    return t_grid


def _propagate_vectors(matrix, vectors, t_grid, h_ode=DEFAULT_H_ODE, start=None):
    """Integrate dv/dt = M v with fixed RK4 steps, returning v at every grid node

    Steps between two nodes are shortened uniformly so every node is hit exactly.
    `vectors` may hold several columns which are integrated together.
    """
    if not h_ode > 0:
        raise ValueError('h_ode must be positive, got %r' % h_ode)

    t_grid = _check_grid(t_grid)
    t = t_grid[0] if start is None else float(start)
    if t_grid[0] < t:
        raise ValueError('The time grid starts before the initial time')

    current = np.array(vectors, dtype=complex)
    propagators = {}
    results = []
    n_steps = 0
    for node in t_grid:
        interval = node - t
        if interval > 0:
            n = max(1, int(math.ceil(interval / h_ode - 1e-9)))
            h = interval / n
            if h not in propagators:
                propagators[h] = _rk4_propagator(matrix, h)

            propagator = propagators[h]
            for _ in range(n):
                current = propagator @ current
            n_steps += n
            t = node

        results.append(current.copy())

    logger.debug('Integrated %d RK4 steps over [%g, %g]', n_steps, t_grid[0], t_grid[-1])

    return np.array(results)


def evolve(rho0, liouvillian, t_grid, h_ode=DEFAULT_H_ODE, start=None):
    """Evolve rho0 under the Liouvillian and return it at every node of t_grid"""
    if not isinstance(rho0, DensityMatrix):
        rho0 = DensityMatrix(rho0, hermitian=False)
    if rho0.dim != liouvillian.dim:
        raise ValueError('rho0 has dimension %d, the Liouvillian acts on dimension %d'
                         % (rho0.dim, liouvillian.dim))

    vectors = _propagate_vectors(liouvillian.matrix, vectorize(rho0.entries), t_grid, h_ode=h_ode, start=start)

    return [DensityMatrix(unvectorize(v, rho0.dim), hermitian=rho0.hermitian_flag) for v in vectors]


def expectation(operator, rho):
    """Tr{A rho}"""
    a = operator.entries if hasattr(operator, 'entries') else np.asarray(operator)
    rho = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho)

    return complex(np.einsum('ij,ji->', a, rho))


def _ket(ket):
    return ket if isinstance(ket, Ket) else Ket(ket)


def regression_matrix_element(operator, phi0, psi0, model, t_grid, h_ode=DEFAULT_H_ODE, t0=0.0):
    """<phi0| A(t) |psi0> = Tr{A V(t, t0)[|psi0><phi0|]} at every node of t_grid"""
    phi0, psi0 = _ket(phi0), _ket(psi0)
    seed = DensityMatrix(np.outer(psi0.amplitudes, phi0.amplitudes.conj()), hermitian=False)
    states = evolve(seed, build_liouvillian(model), t_grid, h_ode=h_ode, start=t0)

    return np.array([expectation(operator, rho) for rho in states])


def doubled_evolution(phi0, psi0, model, t_grid, h_ode=DEFAULT_H_ODE, t0=0.0):
    """Evolve |theta_0><theta_0| under the extended master equation"""
    theta0 = make_theta(_ket(phi0), _ket(psi0))

    return evolve(projector(theta0), build_liouvillian(extend_model(model)), t_grid, h_ode=h_ode, start=t0)


def doubled_block_evolution(phi0, psi0, model, t_grid, h_ode=DEFAULT_H_ODE, t0=0.0):
    """The rho~_21 block of the extended evolution at every node"""
    return [rho.block(2, 1) for rho in doubled_evolution(phi0, psi0, model, t_grid, h_ode=h_ode, t0=t0)]


def doubled_matrix_element(operator, phi0, psi0, model, t_grid, h_ode=DEFAULT_H_ODE, t0=0.0):
    """2 Tr{A rho~_21(t)}, the matrix element computed through the doubled space"""
    blocks = doubled_block_evolution(phi0, psi0, model, t_grid, h_ode=h_ode, t0=t0)

    return np.array([2 * expectation(operator, block) for block in blocks])


def oracle_two_time(operator_a, operator_b, model, t, tau_grid, rho0=None, h_ode=DEFAULT_H_ODE):
    """<A(t + tau) B(t)> from the quantum regression theorem

    rho0 defaults to the steady state, which makes the result independent of t.
    """
    if t < 0:
        raise ValueError('t must be nonnegative, got %r' % t)

    liouvillian = build_liouvillian(model)
    if rho0 is None:
        rho0 = steady_state(model)
    elif not isinstance(rho0, DensityMatrix):
        rho0 = DensityMatrix(rho0)

    rho_t = evolve(rho0, liouvillian, [t], h_ode=h_ode, start=0.0)[0]
    b = operator_b.entries if hasattr(operator_b, 'entries') else np.asarray(operator_b)
    seed = DensityMatrix(b @ rho_t.entries, hermitian=False)
    states = evolve(seed, liouvillian, tau_grid, h_ode=h_ode, start=0.0)

    return np.array([expectation(operator_a, rho) for rho in states])


def steady_state(model, rcond=1e-10):
    """The unique stationary density matrix, from the null space of the Liouvillian"""
    liouvillian = build_liouvillian(model)
    null = linalg.null_space(liouvillian.matrix, rcond=rcond)
    if null.shape[1] != 1:
        raise DegenerateSteadyStateError(null.shape[1])

    rho = unvectorize(null[:, 0], model.dim)
    rho = rho / np.trace(rho)
    rho = 0.5 * (rho + rho.conj().T)

    return DensityMatrix(rho, hermitian=True)


def analytic_decay_element(t, gamma=1.0):
    """<phi0| sigma^+(t) |psi0> = exp(-gamma t / 2) / sqrt(2) for the kets of hilbert.decay_element_kets"""
    return np.exp(-0.5 * gamma * np.asarray(t, dtype=float)) / np.sqrt(2)
