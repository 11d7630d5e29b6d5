# -*- coding: utf-8 -*-
"""The noise module

Reproducible complex Wiener increments with E[dxi] = E[dxi_i dxi_j] = 0 and
E[dxi_i dxi_j^*] = delta_ij dt. Every trajectory owns a substream keyed by
(seed, trajectory_index); keys are derived directly, so the noise of trajectory i
does not depend on how many trajectories come before it.
"""
import numpy as np

__all__ = ['NoiseStream', 'substream', 'wiener_increments', 'increment_blocks']

# Steps drawn per stream and call when a batch is propagated
BLOCK_STEPS = 1024


class NoiseStream(object):
    """The random source of one trajectory

    Single owner: a stream is consumed by exactly one trajectory. `draws` counts the
    random numbers produced so far.
    """
    def __init__(self, seed, trajectory_index):
        if seed < 0 or trajectory_index < 0:
            raise ValueError('seed and trajectory_index must be unsigned, got %r and %r'
                             % (seed, trajectory_index))

        self._seed = int(seed)
        self._trajectory_index = int(trajectory_index)
        sequence = np.random.SeedSequence(entropy=self._seed, spawn_key=(self._trajectory_index,))
        self._generator = np.random.Generator(np.random.Philox(sequence))
        self.draws = 0

    @property
    def seed(self):
        return self._seed

    @property
    def trajectory_index(self):
        return self._trajectory_index

    def normal(self, size):
        """Standard normal reals"""
        values = self._generator.standard_normal(size)
        self.draws += values.size

        return values

    def standard_normal(self, size):
        """Generator spelling of normal, so a stream can drive hilbert.random_ket"""
        return self.normal(size)

    def uniform(self):
        """One uniform number in [0, 1)"""
        self.draws += 1

        return self._generator.random()

    def __repr__(self):
        return 'NoiseStream(seed=%d, trajectory_index=%d)' % (self._seed, self._trajectory_index)


def substream(seed, trajectory_index):
    return NoiseStream(seed=seed, trajectory_index=trajectory_index)


def wiener_increments(stream, n_channels, dt, n_steps=None):
    """Complex Wiener increments, one per channel

    Real and imaginary parts are independent Gaussians of variance dt/2. Returns shape
    (n_channels,), or (n_steps, n_channels) when `n_steps` is given.
    """
    if not dt > 0:
        raise ValueError('dt must be positive, got %r' % dt)

    shape = (n_channels,) if n_steps is None else (n_steps, n_channels)
    parts = stream.normal(shape + (2,)) * np.sqrt(dt / 2.0)

    return parts[..., 0] + 1j * parts[..., 1]


def increment_blocks(streams, n_channels, dt, n_steps):
    """Yield the increments of a batch of trajectories step by step

    Each yielded array has shape (len(streams), n_channels); row b comes from
    streams[b]. Streams are read BLOCK_STEPS steps at a time.
    """
    remaining = n_steps
    while remaining > 0:
        size = min(remaining, BLOCK_STEPS)
        block = np.stack([wiener_increments(stream, n_channels, dt, n_steps=size) for stream in streams], axis=1)
        for increments in block:
            yield increments

        remaining -= size
