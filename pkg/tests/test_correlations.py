# -*- coding: utf-8 -*-
import unittest

import numpy as np

from heisqsd import correlations, master, qsd
from heisqsd.commons import Scheme
from heisqsd.ensemble import covariance
from heisqsd.hilbert import (Ket, Operator, decay_element_kets, decay_model, fluorescence_model, make_theta,
                             random_ket, random_model, two_level_builders)
from heisqsd.noise import substream

from . import LONG_TESTS


def _within(result, reference, n_errors):
    return np.abs(result.mean - reference) <= n_errors * result.std_error


class TestCorrelationRequest(unittest.TestCase):
    """Test request validation"""

    def setUp(self):
        self.sigma_minus, self.sigma_plus, _ = two_level_builders()

    def test_defaults(self):
        """Verify that a steady-state request warms up for 30 time units"""
        request = correlations.CorrelationRequest(self.sigma_plus, self.sigma_minus, 0.0, [0.0, 0.1], 10)

        self.assertEqual(correlations.STEADY_STATE, request.initial)
        self.assertEqual(30.0, request.warmup_time)
        self.assertEqual(1e-3, request.sde.dt)

    def test_explicit_ket_has_no_warmup(self):
        """Verify that an explicit initial ket defaults to no warmup"""
        request = correlations.CorrelationRequest(self.sigma_plus, self.sigma_minus, 0.0, [0.0], 10,
                                                  initial=Ket([0, 1], normalized=True))
        self.assertEqual(0.0, request.warmup_time)

    def test_invalid(self):
        """Verify that bad grids, counts, times and initial conditions are rejected"""
        make = correlations.CorrelationRequest
        with self.assertRaises(ValueError):
            make(self.sigma_plus, self.sigma_minus, 0.0, [-0.1, 0.0], 10)
        with self.assertRaises(ValueError):
            make(self.sigma_plus, self.sigma_minus, 0.0, [0.2, 0.1], 10)
        with self.assertRaises(ValueError):
            make(self.sigma_plus, self.sigma_minus, 0.0, [0.0], 1)
        with self.assertRaises(ValueError):
            make(self.sigma_plus, self.sigma_minus, -1.0, [0.0], 10)
        with self.assertRaises(ValueError):
            make(self.sigma_plus, self.sigma_minus, 0.0, [0.0], 10, initial='thermal')


class TestPrepareInitial(unittest.TestCase):
    """Test the initial state of a trajectory"""

    def test_ket_is_returned(self):
        """Verify that an explicit ket is used as it is"""
        ket = Ket.normalize([1, 2])

        self.assertIs(ket, correlations.prepare_initial(ket, decay_model()))

    def test_random_uniform(self):
        """Verify that random initial kets are normalized and cost two draws per amplitude"""
        streams = [substream(0, i) for i in range(4)]
        states = correlations.prepare_initial(correlations.RANDOM_UNIFORM, fluorescence_model(), stream=streams)

        self.assertEqual((4, 2), states.shape)
        np.testing.assert_allclose(1.0, np.linalg.norm(states, axis=-1), atol=1e-14)
        self.assertEqual([4] * 4, [stream.draws for stream in streams])

    def test_single_stream(self):
        """Verify that a single stream gives a single Ket"""
        state = correlations.prepare_initial(correlations.RANDOM_UNIFORM, decay_model(), warmup_time=0.1,
                                             sde=qsd.SdeConfig(dt=0.01), stream=substream(1, 0))

        self.assertIsInstance(state, Ket)
        self.assertAlmostEqual(1.0, state.norm, places=12)

    def test_unknown(self):
        """Verify that an unknown initial condition is rejected"""
        with self.assertRaises(ValueError):
            correlations.prepare_initial('vacuum', decay_model(), stream=substream(0, 0))

    def test_same_draws_as_random_ket(self):
        """Verify that without warmup a stream yields the random ket it would drive directly"""
        state = correlations.prepare_initial(correlations.RANDOM_UNIFORM, decay_model(), stream=substream(4, 2))

        np.testing.assert_array_equal(random_ket(2, substream(4, 2)).amplitudes, state.amplitudes)

    def test_decay_reaches_ground_state(self):
        """Verify that a decaying atom ends in |g><g| from any random start"""
        streams = [substream(13, i) for i in range(200)]
        states = correlations.prepare_initial(correlations.RANDOM_UNIFORM, decay_model(), warmup_time=30.0,
                                              sde=qsd.SdeConfig(dt=0.01), stream=streams)

        mean, _ = covariance(states)
        np.testing.assert_allclose(np.diag([1.0, 0.0]), mean, rtol=0, atol=1e-6)

    def _check_steady_state(self, n, dt):
        model = fluorescence_model(omega=10.0)
        streams = [substream(14, i) for i in range(n)]
        states = correlations.prepare_initial(correlations.STEADY_STATE, model, sde=qsd.SdeConfig(dt=dt),
                                              stream=streams)

        mean, error = covariance(states)
        reference = master.steady_state(model).entries
        self.assertTrue(np.all(np.abs(mean - reference) <= 4 * error), np.abs(mean - reference) / error)

    def test_warmup_reaches_steady_state(self):
        """Verify that after 30 time units the ensemble covariance of the driven atom is its steady state"""
        self._check_steady_state(600, 0.002)

    @unittest.skipUnless(LONG_TESTS, 'set HEISQSD_LONG_TESTS to run acceptance-size ensembles')
    def test_warmup_reaches_steady_state_full_ensemble(self):
        """Verify the steady state after warmup with 10^4 trajectories at dt = 0.001"""
        self._check_steady_state(10000, 0.001)


class TestHeisenbergElement(unittest.TestCase):
    """Test single-time Heisenberg matrix elements"""

    def setUp(self):
        self.model = decay_model()
        self.phi0, self.psi0 = decay_element_kets()
        _, self.sigma_plus, _ = two_level_builders()
        self.grid = 0.1 * np.arange(1, 41)

    def test_decay_element(self):
        """Verify that the sigma^+ element follows exp(-t/2)/sqrt(2)"""
        result = correlations.heisenberg_element(self.sigma_plus, self.phi0, self.psi0, self.model, self.grid,
                                                 n_trajectories=400, seed=1)
        analytic = master.analytic_decay_element(self.grid)

        self.assertEqual(40, len(result.mean))
        self.assertGreaterEqual(np.sum(np.abs(result.mean.real - analytic) <= 3 * result.std_error), 37)
        self.assertGreaterEqual(np.sum(np.abs(result.mean.imag) <= 3 * result.std_error), 37)

    def test_identity(self):
        """Verify that A = I gives <phi_0|psi_0> at all times"""
        result = correlations.heisenberg_element(np.eye(2), self.phi0, self.psi0, fluorescence_model(), self.grid,
                                                 n_trajectories=300, seed=2)

        self.assertTrue(np.all(_within(result, 1 / np.sqrt(2), 4)))

    def test_quasilinear_scheme(self):
        """Verify that the quasi-linear scheme estimates the same element"""
        grid = self.grid[4::5]
        result = correlations.heisenberg_element(self.sigma_plus, self.phi0, self.psi0, self.model, grid,
                                                 n_trajectories=400, seed=3,
                                                 sde=qsd.SdeConfig(scheme=Scheme.QUASI_LINEAR))

        self.assertTrue(np.all(_within(result, master.analytic_decay_element(grid), 4)))

    def test_random_model(self):
        """Verify agreement with the doubled master equation on a random three level model"""
        rng = np.random.default_rng(11)
        model = random_model(3, 2, rng)
        phi0, psi0 = random_ket(3, rng), random_ket(3, rng)
        operator = Operator(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
        grid = [0.5, 1.0]

        result = correlations.heisenberg_element(operator, phi0, psi0, model, grid, n_trajectories=400, seed=4)
        reference = master.doubled_matrix_element(operator, phi0, psi0, model, grid)

        self.assertTrue(np.all(_within(result, reference, 4)))

    def test_worker_count(self):
        """Verify that the estimate does not depend on the number of workers"""
        grid = [0.5, 1.0]
        single = correlations.heisenberg_element(self.sigma_plus, self.phi0, self.psi0, self.model, grid,
                                                 n_trajectories=300, sde=qsd.SdeConfig(dt=0.01), seed=5)
        pooled = correlations.heisenberg_element(self.sigma_plus, self.phi0, self.psi0, self.model, grid,
                                                 n_trajectories=300, sde=qsd.SdeConfig(dt=0.01), seed=5, workers=3)

        np.testing.assert_array_equal(single.mean, pooled.mean)
        np.testing.assert_array_equal(single.std_error, pooled.std_error)

    @unittest.skipUnless(LONG_TESTS, 'set HEISQSD_LONG_TESTS to run acceptance-size ensembles')
    def test_decay_element_full_ensemble(self):
        """Verify the decay element with 1000 trajectories at 38 of 40 nodes"""
        result = correlations.heisenberg_element(self.sigma_plus, self.phi0, self.psi0, self.model, self.grid,
                                                 n_trajectories=1000, seed=0)
        analytic = master.analytic_decay_element(self.grid)

        self.assertGreaterEqual(np.sum(np.abs(result.mean.real - analytic) <= 3 * result.std_error), 38)
        self.assertGreaterEqual(np.sum(np.abs(result.mean.imag) <= 3 * result.std_error), 38)


class TestCorrelate(unittest.TestCase):
    """Test two-time correlation functions"""

    def setUp(self):
        self.sigma_minus, self.sigma_plus, _ = two_level_builders()
        self.streams = [substream(8, i) for i in range(16)]

    def test_zero_delay_identity(self):
        """Verify that tau = 0 gives <psi|A B|psi> for every realization"""
        psi = Ket.normalize([1, 2j])
        a = Operator([[0.3, 1j], [-1j, 2]])
        b = Operator([[1, 2], [0.5j, -1]])
        request = correlations.CorrelationRequest(a, b, 0.0, [0.0], 16, initial=psi)

        samples = correlations.correlation_samples(request, fluorescence_model(), self.streams)
        expected = np.vdot(psi.amplitudes, (a @ b).entries @ psi.amplitudes)

        self.assertEqual((16, 1), samples.shape)
        np.testing.assert_allclose(expected, samples[:, 0], rtol=0, atol=1e-12)

    def test_unit_b_reduces_to_matrix_element(self):
        """Verify that B = I reduces to the single-time estimator with phi_0 = psi_0"""
        model = fluorescence_model()
        psi = Ket.normalize([1, 1j])
        sde = qsd.SdeConfig(dt=0.01)
        request = correlations.CorrelationRequest(self.sigma_plus, np.eye(2), 0.0, [0.0, 0.2, 0.4], 16,
                                                  initial=psi, sde=sde)

        samples = correlations.correlation_samples(request, model, self.streams)

        theta = np.tile(make_theta(psi, psi).vector, (16, 1))
        trajectory = qsd.propagate(theta, model, sde, [substream(8, i) for i in range(16)], [0.0, 0.2, 0.4])
        expected = qsd.matrix_element_samples(trajectory.states, self.sigma_plus).T

        np.testing.assert_allclose(expected, samples, rtol=0, atol=1e-12)

    def test_fluorescence_g1(self):
        """Verify that the steady-state g1 of the driven atom follows the regression theorem"""
        model = fluorescence_model(omega=10.0)
        tau_grid = np.linspace(0, 1, 11)
        request = correlations.CorrelationRequest(self.sigma_plus, self.sigma_minus, 0.0, tau_grid, 256,
                                                  warmup_time=10.0)

        result = correlations.correlate(request, model, seed=9)
        reference = master.oracle_two_time(self.sigma_plus, self.sigma_minus, model, 0.0, tau_grid)

        self.assertGreaterEqual(np.sum(_within(result, reference, 4)), 10)

    def test_decay_from_excited_state(self):
        """Verify <sigma^+(t + tau) sigma^-(t)> of a decaying atom prepared in the excited state"""
        model = decay_model()
        tau_grid = np.linspace(0, 2, 5)
        request = correlations.CorrelationRequest(self.sigma_plus, self.sigma_minus, 0.5, tau_grid, 400,
                                                  initial=Ket([0, 1], normalized=True),
                                                  sde=qsd.SdeConfig(dt=0.005))

        result = correlations.correlate(request, model, seed=10)
        rho0 = np.array([[0, 0], [0, 1]])
        reference = master.oracle_two_time(self.sigma_plus, self.sigma_minus, model, 0.5, tau_grid, rho0=rho0)

        self.assertTrue(np.all(_within(result, reference, 4)))

    @unittest.skipUnless(LONG_TESTS, 'set HEISQSD_LONG_TESTS to run acceptance-size ensembles')
    def test_fluorescence_g1_full_ensemble(self):
        """Verify g1 with 10^4 trajectories and a warmup of 30 at 95% of the nodes"""
        model = fluorescence_model(omega=10.0)
        tau_grid = np.linspace(0, 3, 31)
        request = correlations.CorrelationRequest(self.sigma_plus, self.sigma_minus, 0.0, tau_grid, 10000)

        result = correlations.correlate(request, model, seed=0, workers=4)
        reference = master.oracle_two_time(self.sigma_plus, self.sigma_minus, model, 0.0, tau_grid)

        self.assertGreaterEqual(np.mean(_within(result, reference, 3)), 0.95)


if __name__ == '__main__':
    unittest.main()
