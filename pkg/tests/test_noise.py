# -*- coding: utf-8 -*-
import unittest

import numpy as np
from scipy import stats

from heisqsd.ensemble import mean_and_error
from heisqsd.noise import BLOCK_STEPS, NoiseStream, increment_blocks, substream, wiener_increments


class TestNoiseStream(unittest.TestCase):
    """Test the seeded substreams"""

    def test_reproducible(self):
        """Verify that equal (seed, index) pairs produce equal increments"""
        first = wiener_increments(substream(42, 7), 2, 0.01, n_steps=50)
        second = wiener_increments(substream(42, 7), 2, 0.01, n_steps=50)

        np.testing.assert_array_equal(first, second)

    def test_indices_differ(self):
        """Verify that neighbouring trajectory indices get different noise"""
        first = wiener_increments(substream(42, 0), 1, 0.01, n_steps=20)
        second = wiener_increments(substream(42, 1), 1, 0.01, n_steps=20)

        self.assertFalse(np.allclose(first, second))

    def test_neighbouring_streams_uncorrelated(self):
        """Verify that the first 10^5 draws of indices 0 and 1 have correlation below 0.02"""
        first = substream(42, 0).normal(100000)
        second = substream(42, 1).normal(100000)

        self.assertLess(abs(np.corrcoef(first, second)[0, 1]), 0.02)

    def test_independent_of_creation_order(self):
        """Verify that the noise of a trajectory does not depend on the streams made before it"""
        for index in range(5):
            wiener_increments(substream(3, index), 1, 0.01, n_steps=10)
        late = wiener_increments(substream(3, 5), 1, 0.01, n_steps=10)
        alone = wiener_increments(substream(3, 5), 1, 0.01, n_steps=10)

        np.testing.assert_array_equal(alone, late)

    def test_draw_counter(self):
        """Verify that every increment costs two draws per channel"""
        stream = NoiseStream(seed=1, trajectory_index=0)
        wiener_increments(stream, 3, 0.01, n_steps=10)
        stream.uniform()

        self.assertEqual(2 * 3 * 10 + 1, stream.draws)

    def test_negative_seed(self):
        """Verify that seeds and indices must be unsigned"""
        with self.assertRaises(ValueError):
            NoiseStream(seed=-1, trajectory_index=0)
        with self.assertRaises(ValueError):
            NoiseStream(seed=0, trajectory_index=-3)

    def test_non_positive_dt(self):
        """Verify that a zero step size is rejected"""
        with self.assertRaises(ValueError):
            wiener_increments(substream(0, 0), 1, 0.0)


class TestWienerStatistics(unittest.TestCase):
    """Test the moments of the complex increments"""

    def setUp(self):
        self.dt = 0.01
        self.increments = wiener_increments(substream(2024, 0), 1, self.dt, n_steps=20000)[:, 0]

    def test_second_moments(self):
        """Verify that E|dxi|^2 = dt and E[dxi^2] = 0"""
        self.assertAlmostEqual(1.0, np.mean(np.abs(self.increments) ** 2) / self.dt, delta=0.05)
        self.assertLess(abs(np.mean(self.increments ** 2)), 0.05 * self.dt)

    def test_mean(self):
        """Verify that the increments have zero mean"""
        self.assertLess(abs(np.mean(self.increments)), 5 * np.sqrt(self.dt / 20000))

    def test_real_part_is_gaussian(self):
        """Verify that the real part is normal with variance dt/2"""
        statistic, p_value = stats.kstest(self.increments.real, 'norm', args=(0, np.sqrt(self.dt / 2)))

        self.assertGreater(p_value, 1e-3)

    def test_channels_independent(self):
        """Verify that E[dxi_1 dxi_2^*] is within 4 standard errors of zero over 10^6 steps"""
        increments = wiener_increments(substream(7, 0), 2, self.dt, n_steps=1000000)

        mean, error = mean_and_error(increments[:, 0] * increments[:, 1].conj())
        self.assertLess(abs(mean), 4 * error)

    def test_standard_deviation_scales_with_sqrt_dt(self):
        """Verify that four times the step size doubles the spread of Re(dxi) to within 1%"""
        small = wiener_increments(substream(8, 0), 1, self.dt, n_steps=1000000)[:, 0]
        large = wiener_increments(substream(8, 1), 1, 4 * self.dt, n_steps=1000000)[:, 0]

        self.assertAlmostEqual(2.0, np.std(large.real) / np.std(small.real), delta=0.02)


class TestIncrementBlocks(unittest.TestCase):
    """Test batched increment generation"""

    def test_shapes(self):
        """Verify that each yielded block holds one row per stream"""
        streams = [substream(0, i) for i in range(3)]
        blocks = list(increment_blocks(streams, 2, 0.01, 5))

        self.assertEqual(5, len(blocks))
        self.assertEqual((3, 2), blocks[0].shape)

    def test_matches_direct_draws(self):
        """Verify that blocked draws across a block boundary equal direct draws of the same stream"""
        n_steps = BLOCK_STEPS + 100
        blocked = np.array(list(increment_blocks([substream(9, 4)], 1, 0.01, n_steps)))[:, 0, :]

        stream = substream(9, 4)
        direct = np.concatenate([wiener_increments(stream, 1, 0.01, n_steps=BLOCK_STEPS),
                                 wiener_increments(stream, 1, 0.01, n_steps=100)])

        np.testing.assert_array_equal(direct, blocked)

    def test_row_is_trajectory_noise(self):
        """Verify that a stream gives the same noise alone as inside a batch"""
        batch = np.array(list(increment_blocks([substream(1, 0), substream(1, 1)], 1, 0.01, 30)))
        alone = np.array(list(increment_blocks([substream(1, 1)], 1, 0.01, 30)))

        np.testing.assert_array_equal(alone[:, 0], batch[:, 1])


if __name__ == '__main__':
    unittest.main()
