# -*- coding: utf-8 -*-
"""The ensemble module

Runs many independent trajectories over a worker pool, reduces them into estimates
with standard errors, and measures accuracy against cost for the benchmark.

A task is a callable taking the list of NoiseStreams of one chunk of trajectories and
returning their samples as a (chunk, grid) complex array, or a TaskOutput when it also
reports per-trajectory diagnostics. Rows that are entirely NaN mark aborted
realizations; they are counted and left out of the estimate.

Chunks have a fixed size and are reduced in trajectory order, so results do not
depend on the number of workers.
"""
import logging
import time
from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .commons import InstabilityError
from .noise import substream

__all__ = ['TaskOutput', 'EnsembleResult', 'BenchmarkPoint', 'EnsembleError', 'mean_and_error', 'covariance',
           'run_ensemble', 'relative_rms_error', 'benchmark_sweep', 'BENCHMARK_FIELDS', 'MATCHED_ERROR',
           'BenchmarkReport', 'matched_error_wall_times', 'benchmark_report']

logger = logging.getLogger(__name__)

CHUNK_SIZE = 256

TaskOutput = namedtuple('TaskOutput', 'values diagnostics')

EnsembleResult = namedtuple('EnsembleResult',
                            'grid mean std_error n n_aborted wall_time_seconds core_seconds draws_total method '
                            'samples diagnostics')


class BenchmarkPoint(namedtuple('BenchmarkPoint',
                                'method n rms_relative_error est_std wall_time_seconds draws_total')):
    __slots__ = ()

    @property
    def draws_per_trajectory(self):
        return self.draws_total / self.n


BENCHMARK_FIELDS = BenchmarkPoint._fields

# Relative error at which the benchmark compares the cost of the methods
MATCHED_ERROR = 0.03


class EnsembleError(RuntimeError):
    """One or more trajectory chunks failed

    `failures` lists (first_index, last_index, exception) for every failed chunk.
    """
    def __init__(self, failures):
        self.failures = list(failures)
        described = ', '.join('%d-%d: %s' % (first, last, exc) for first, last, exc in self.failures)
        super().__init__('%d trajectory chunk(s) failed (%s)' % (len(self.failures), described))


def mean_and_error(samples):
    """Mean over the first axis and its standard error

    A complex sample counts as two real components: the error is
    sqrt((var(Re) + var(Im)) / n) with the unbiased sample variance.
    """
    samples = np.asarray(samples)
    n = samples.shape[0]
    if n < 2:
        raise ValueError('Need at least 2 samples for a standard error, got %d' % n)

    mean = samples.mean(axis=0)
    variance = np.var(samples.real, axis=0, ddof=1) + np.var(samples.imag, axis=0, ddof=1)

    return mean, np.sqrt(variance / n)


def covariance(states):
    """The ensemble covariance E|psi><psi| with componentwise standard errors"""
    states = np.asarray(states, dtype=complex)
    outer = states[:, :, None] * states[:, None, :].conj()

    return mean_and_error(outer)


def _chunks(n, size):
    return [(first, min(first + size, n)) for first in range(0, n, size)]


def _run_chunk(task, seed, first, last):
    streams = [substream(seed, index) for index in range(first, last)]
    output = task(streams)
    if not isinstance(output, TaskOutput):
        output = TaskOutput(values=output, diagnostics={})

    values = np.asarray(output.values, dtype=complex)
    if values.ndim == 1:
        values = values[:, None]
    if values.shape[0] != last - first:
        raise ValueError('Task returned %d rows for %d trajectories' % (values.shape[0], last - first))

    logger.debug('Trajectories %d-%d done', first, last - 1)

    return values, output.diagnostics, sum(stream.draws for stream in streams)


def run_ensemble(task, n, seed=0, workers=1, grid=None, method='qsd', chunk_size=CHUNK_SIZE):
    """Run n trajectories of `task` and reduce them into an EnsembleResult"""
    if n < 2:
        raise ValueError('An ensemble needs at least 2 trajectories, got %d' % n)
    if workers < 1:
        raise ValueError('workers must be positive, got %d' % workers)

    logger.info('Running %d %s trajectories on %d worker(s)', n, method, workers)
    wall_start, core_start = time.perf_counter(), time.process_time()

    chunks = _chunks(n, chunk_size)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(_run_chunk, task, seed, first, last) for first, last in chunks]

    outputs = []
    failures = []
    for (first, last), future in zip(chunks, futures):
        try:
            outputs.append(future.result())
        except Exception as exc:
            failures.append((first, last - 1, exc))
    if failures:
        raise EnsembleError(failures)

    wall_time = time.perf_counter() - wall_start
    core_seconds = time.process_time() - core_start

    samples = np.concatenate([values for values, _, _ in outputs])
    diagnostics = {}
    for _, chunk_diagnostics, _ in outputs:
        for name, values in chunk_diagnostics.items():
            diagnostics.setdefault(name, []).append(np.asarray(values))
    diagnostics = {name: np.concatenate(parts) for name, parts in diagnostics.items()}

    aborted = np.all(np.isnan(samples), axis=1)
    if aborted.any():
        logger.warning('%d of %d realizations aborted', aborted.sum(), n)
    if n - aborted.sum() < 2:
        raise InstabilityError('Only %d of %d %s realizations survived' % (n - aborted.sum(), n, method))

    mean, std_error = mean_and_error(samples[~aborted])
    if grid is None:
        grid = np.arange(samples.shape[1], dtype=float)

    logger.info('Finished %d %s trajectories in %.3f s', n, method, wall_time)

    return EnsembleResult(grid=np.asarray(grid, dtype=float), mean=mean, std_error=std_error, n=n,
                          n_aborted=int(aborted.sum()), wall_time_seconds=wall_time, core_seconds=core_seconds,
                          draws_total=int(sum(draws for _, _, draws in outputs)), method=method,
                          samples=samples, diagnostics=diagnostics)


def relative_rms_error(estimate, reference):
    """sqrt(sum |est - ref|^2 / sum |ref|^2) over the grid"""
    estimate = np.asarray(estimate, dtype=complex)
    reference = np.asarray(reference, dtype=complex)
    if estimate.shape != reference.shape:
        raise ValueError('Estimate and reference grids differ: %s != %s' % (estimate.shape, reference.shape))

    scale = np.sum(np.abs(reference) ** 2)
    if scale == 0:
        raise ValueError('The reference series is identically zero')

    return float(np.sqrt(np.sum(np.abs(estimate - reference) ** 2) / scale))


def benchmark_sweep(tasks, reference, n_list, methods=None, seed=0, workers=1, grid=None, results=None):
    """Run every (method, n) pair and measure its error and cost

    `tasks` maps a method name to its ensemble task. est_std is the estimated standard
    deviation of the estimate relative to the reference, on the same scale as the
    relative RMS error. Pass a dict as `results` to also collect every EnsembleResult
    under its (method, n) key.
    """
    if not len(n_list):
        raise ValueError('n_list is empty')

    methods = list(tasks) if methods is None else list(methods)
    reference = np.asarray(reference, dtype=complex)
    scale = np.sqrt(np.sum(np.abs(reference) ** 2))

    points = []
    for method in methods:
        for n in n_list:
            result = run_ensemble(tasks[method], n, seed=seed, workers=workers, grid=grid, method=method)
            if results is not None:
                results[method, n] = result
            points.append(BenchmarkPoint(method=method, n=n,
                                         rms_relative_error=relative_rms_error(result.mean, reference),
                                         est_std=float(np.sqrt(np.sum(result.std_error ** 2)) / scale),
                                         wall_time_seconds=result.wall_time_seconds,
                                         draws_total=result.draws_total))
            logger.info('%s n=%d: relative error %.4f in %.3f s', method, n, points[-1].rms_relative_error,
                        points[-1].wall_time_seconds)

    return points


def matched_error_wall_times(points, target_error=MATCHED_ERROR):
    """Wall time each method needs to reach a relative error of target_error

    The error of an ensemble falls like n^-1/2 while its cost grows like n, so a point
    predicts wall_time * (rms_relative_error / target_error)^2. The predictions of a
    method are combined by their geometric mean. A method without a point of nonzero
    error maps to NaN.
    """
    if not target_error > 0:
        raise ValueError('target_error must be positive, got %r' % target_error)

    predictions = {}
    for point in points:
        predictions.setdefault(point.method, [])
        if point.rms_relative_error > 0 and point.wall_time_seconds > 0:
            scale = (point.rms_relative_error / target_error) ** 2
            predictions[point.method].append(np.log(point.wall_time_seconds * scale))

    return {method: float(np.exp(np.mean(logs))) if logs else float('nan') for method, logs in predictions.items()}


class BenchmarkReport(namedtuple('BenchmarkReport', 'target_error wall_times draws_per_trajectory fastest')):
    """Cost of every method at a common relative error

    wall_times maps a method to its predicted wall time at target_error,
    draws_per_trajectory maps it to {n: random numbers per trajectory} and fastest
    names the cheapest method (None when no method could be rated).
    """
    __slots__ = ()

    def to_dict(self):
        return {'target_error': self.target_error,
                'wall_time_at_target_seconds': dict(self.wall_times),
                'draws_per_trajectory': {method: {str(n): value for n, value in counts.items()}
                                         for method, counts in self.draws_per_trajectory.items()},
                'fastest': self.fastest}


def benchmark_report(points, target_error=MATCHED_ERROR):
    """Summarize benchmark_sweep points at a matched relative error"""
    wall_times = matched_error_wall_times(points, target_error=target_error)

    draws = {}
    for point in points:
        draws.setdefault(point.method, {})[point.n] = point.draws_per_trajectory

    rated = [method for method, seconds in wall_times.items() if np.isfinite(seconds)]
    fastest = min(rated, key=wall_times.get) if rated else None
    if fastest is not None:
        logger.info('At relative error %g the fastest method is %s (%.3f s)', target_error, fastest,
                    wall_times[fastest])

    return BenchmarkReport(target_error=target_error, wall_times=wall_times, draws_per_trajectory=draws,
                           fastest=fastest)
