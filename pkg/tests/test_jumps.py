# -*- coding: utf-8 -*-
import unittest

import numpy as np
from scipy import stats

from heisqsd import correlations, jumps, master, qsd
from heisqsd.commons import JumpProbabilityError, Scheme
from heisqsd.ensemble import covariance
from heisqsd.hilbert import Ket, decay_element_kets, decay_model, fluorescence_model, two_level_builders
from heisqsd.noise import substream

from . import LONG_TESTS

GROUND = np.array([1, 0], dtype=complex)
EXCITED = np.array([0, 1], dtype=complex)


class TestJumpConfig(unittest.TestCase):
    """Test the jump settings"""

    def test_non_positive_dt(self):
        """Verify that dt must be positive"""
        with self.assertRaises(ValueError):
            jumps.JumpConfig(dt=-0.1)


class TestStepJump(unittest.TestCase):
    """Test single substeps"""

    def test_ground_state_is_dark(self):
        """Verify that the ground state of a decaying atom never moves"""
        stream = substream(0, 0)
        clock = jumps.JumpClock(stream)
        state = Ket(GROUND)
        for _ in range(100):
            state = jumps.step_jump(state, decay_model(), 0.01, stream, clock=clock)

        np.testing.assert_allclose(GROUND, state.amplitudes, atol=1e-15)
        self.assertEqual(1, stream.draws)

    def test_unnormalized(self):
        """Verify that the state must be normalized"""
        with self.assertRaises(ValueError):
            jumps.step_jump(np.array([1.0, 1.0]), decay_model(), 0.01, substream(0, 0))

    def test_probability_too_large(self):
        """Verify that a substep with jump probability above 0.1 is refused"""
        with self.assertRaises(JumpProbabilityError):
            jumps.step_jump(Ket(EXCITED), decay_model(), 0.5, substream(0, 0))

    def test_single_substep_jump_probability(self):
        """Verify that without a clock one uniform decides a jump with probability dt |L psi|^2"""
        streams = [substream(17, i) for i in range(4000)]
        states = [jumps.step_jump(Ket(EXCITED), decay_model(), 0.05, stream) for stream in streams]

        jumped = np.array([abs(state.amplitudes[0]) == 1.0 for state in states])
        draws = np.array([stream.draws for stream in streams])
        np.testing.assert_array_equal(np.where(jumped, 3, 1), draws)
        self.assertLess(abs(jumped.mean() - 0.05), 4 * np.sqrt(0.05 * 0.95 / 4000))

    def test_state_stays_normalized(self):
        """Verify that the state is normalized after every substep"""
        stream = substream(3, 0)
        clock = jumps.JumpClock(stream)
        state = Ket.normalize([1, 1])
        for _ in range(50):
            state = jumps.step_jump(state, fluorescence_model(), 0.01, stream, clock=clock)
            self.assertAlmostEqual(1.0, state.norm, places=12)


class TestPropagateJumps(unittest.TestCase):
    """Test jump trajectories"""

    def test_waiting_times(self):
        """Verify that the first emission time of an excited atom is exponential with rate gamma"""
        n = 2000
        streams = [substream(12, i) for i in range(n)]
        trajectory = jumps.propagate_jumps(np.tile(EXCITED, (n, 1)), decay_model(), jumps.JumpConfig(dt=1e-3),
                                           streams, [0.0, 8.0])

        times = trajectory.first_jump_times[np.isfinite(trajectory.first_jump_times)]
        self.assertGreater(len(times), 0.99 * n)
        statistic, p_value = stats.kstest(times, 'expon')
        self.assertGreater(p_value, 0.01)

    def test_draw_counter(self):
        """Verify that a trajectory costs one opening threshold and two draws per jump"""
        n = 50
        streams = [substream(4, i) for i in range(n)]
        trajectory = jumps.propagate_jumps(np.tile(EXCITED, (n, 1)), decay_model(), jumps.JumpConfig(dt=0.01),
                                           streams, [0.0, 1.0, 2.0])

        np.testing.assert_array_equal(1 + 2 * trajectory.jump_counts, [stream.draws for stream in streams])
        self.assertTrue(np.all(trajectory.jump_counts <= 1))

    def test_excited_atom_ends_in_ground_state(self):
        """Verify that a jump puts the decaying atom into the ground state"""
        trajectory = jumps.propagate_jumps(Ket(EXCITED), decay_model(), jumps.JumpConfig(dt=0.01),
                                           substream(0, 1), [0.0, 20.0])

        self.assertEqual(1, trajectory.jump_counts[0])
        np.testing.assert_allclose(1.0, np.abs(trajectory.states[-1, 0]), atol=1e-12)

    def test_zero_block_stays_zero(self):
        """Verify that a zero lower block remains zero through drifts and jumps"""
        theta = np.concatenate([Ket.normalize([1, 1]).amplitudes, np.zeros(2)])
        streams = [substream(6, i) for i in range(20)]
        trajectory = jumps.propagate_jumps(np.tile(theta, (20, 1)), fluorescence_model(), jumps.JumpConfig(dt=0.01),
                                           streams, [0.0, 1.0, 2.0])

        self.assertGreater(trajectory.jump_counts.sum(), 0)
        np.testing.assert_array_equal(np.zeros((3, 20, 2)), trajectory.states[..., 2:])

    def test_covariance(self):
        """Verify that E|psi><psi| matches rho(t) within 4 standard errors"""
        n = 2000
        psi0 = Ket.normalize([1, 1])
        trajectory = jumps.propagate_jumps(np.tile(psi0.amplitudes, (n, 1)), decay_model(),
                                           jumps.JumpConfig(dt=1e-3), [substream(13, i) for i in range(n)],
                                           [0.0, 1.0])

        mean, error = covariance(trajectory.states[-1])
        rho0 = np.outer(psi0.amplitudes, psi0.amplitudes.conj())
        reference = master.evolve(rho0, master.build_liouvillian(decay_model()), [0.0, 1.0])[-1].entries

        self.assertTrue(np.all(np.abs(mean - reference) <= 4 * error + 1e-12))


class TestJumpEstimators(unittest.TestCase):
    """Test matrix elements and correlations from jump trajectories"""

    def setUp(self):
        self.sigma_minus, self.sigma_plus, _ = two_level_builders()

    def test_decay_element(self):
        """Verify that the jump estimate follows exp(-t/2)/sqrt(2)"""
        phi0, psi0 = decay_element_kets()
        grid = 0.2 * np.arange(1, 11)

        result = jumps.jump_matrix_element(self.sigma_plus, phi0, psi0, decay_model(), grid, n_trajectories=400,
                                           seed=1)

        self.assertEqual('jump', result.method)
        self.assertTrue(np.all(np.abs(result.mean - master.analytic_decay_element(grid)) <= 4 * result.std_error))

    def test_fluorescence_g1(self):
        """Verify the steady-state g1 of the driven atom from jump trajectories"""
        model = fluorescence_model(omega=10.0)
        tau_grid = np.linspace(0, 1, 11)
        request = correlations.CorrelationRequest(self.sigma_plus, self.sigma_minus, 0.0, tau_grid, 256,
                                                  warmup_time=10.0,
                                                  sde=qsd.SdeConfig(scheme=Scheme.QUASI_LINEAR))

        result = jumps.jump_correlate(request, model, seed=2)
        reference = master.oracle_two_time(self.sigma_plus, self.sigma_minus, model, 0.0, tau_grid)

        within = np.abs(result.mean - reference) <= 4 * result.std_error
        self.assertGreaterEqual(np.sum(within), 10)

    def test_consistent_with_diffusion(self):
        """Verify that jump and diffusion estimates agree within their combined errors"""
        phi0, psi0 = decay_element_kets()
        grid = [0.5, 1.0, 2.0]
        model = decay_model()

        jump = jumps.jump_matrix_element(self.sigma_plus, phi0, psi0, model, grid, n_trajectories=300, seed=3)
        diffusion = correlations.heisenberg_element(self.sigma_plus, phi0, psi0, model, grid, n_trajectories=300,
                                                    seed=3)

        combined = np.sqrt(jump.std_error ** 2 + diffusion.std_error ** 2)
        self.assertTrue(np.all(np.abs(jump.mean - diffusion.mean) <= 4 * combined))

    @unittest.skipUnless(LONG_TESTS, 'set HEISQSD_LONG_TESTS to run acceptance-size ensembles')
    def test_decay_element_full_ensemble(self):
        """Verify the jump decay element with 1000 trajectories within 3 standard errors"""
        phi0, psi0 = decay_element_kets()
        grid = 0.1 * np.arange(1, 41)

        result = jumps.jump_matrix_element(self.sigma_plus, phi0, psi0, decay_model(), grid, n_trajectories=1000,
                                           seed=0)

        within = np.abs(result.mean - master.analytic_decay_element(grid)) <= 3 * result.std_error
        self.assertGreaterEqual(np.sum(within), 38)


if __name__ == '__main__':
    unittest.main()
