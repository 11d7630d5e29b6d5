# -*- coding: utf-8 -*-
"""The command line module

    simulate --config run.json [--seed N] [--n N] [--dt X] [--unraveling qsd|jump]
             [--workers K] [--out DIR] [-v]

Every run writes results.csv (grid,mean_re,mean_im,std_error), reference.csv (the
master equation oracle on the same grid) and metadata.json to the output directory.
The benchmark scenario adds benchmark.csv and benchmark_report.json, the cost of each
method at a matched relative error.
Exit status: 0 on success, 2 for an invalid configuration (nothing is written),
3 for a numerical failure (instability.json is written and its path printed).
"""
import argparse
import csv
import json
import logging
import os
import subprocess
import sys
import time
from collections import namedtuple

import numpy as np

from . import __version__, config as run_config, correlations, gisin, jumps, master, qsd
from .commons import ConfigError, DegenerateSteadyStateError, JumpProbabilityError, Scenario, Unraveling
from .ensemble import BENCHMARK_FIELDS, EnsembleError, benchmark_report, benchmark_sweep
from .hilbert import Ket, decay_element_kets, two_level_builders

__all__ = ['Outcome', 'SCENARIOS', 'EXIT_OK', 'EXIT_CONFIG', 'EXIT_NUMERICAL', 'run', 'main']

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

NUMERICAL_FAILURES = (ArithmeticError, JumpProbabilityError, DegenerateSteadyStateError)

RESULT_FIELDS = ('grid', 'mean_re', 'mean_im', 'std_error')
REFERENCE_FIELDS = ('grid', 'reference_re', 'reference_im')

Outcome = namedtuple('Outcome', 'result reference tables reports')
Outcome.__doc__ = """What a scenario produced

result is the EnsembleResult written to results.csv, reference the oracle on its grid,
tables maps extra CSV file names to (header, rows) and reports maps JSON file names
to serializable objects.
"""


def _sde(config):
    return qsd.SdeConfig(dt=config.dt, scheme=config.scheme)


def _matrix_element(config, operator, phi0, psi0, model, grid):
    if config.unraveling == Unraveling.JUMP.value:
        return jumps.jump_matrix_element(operator, phi0, psi0, model, grid, config.n_trajectories,
                                         config=jumps.JumpConfig(dt=config.dt), seed=config.seed,
                                         workers=config.workers)

    return correlations.heisenberg_element(operator, phi0, psi0, model, grid, config.n_trajectories,
                                           sde=_sde(config), seed=config.seed, workers=config.workers)


def _g1_request(config, n_trajectories=None):
    sigma_minus, sigma_plus, _ = two_level_builders(omega=config.omega)
    return correlations.CorrelationRequest(sigma_plus, sigma_minus, t=0.0, tau_grid=config.grid,
                                           n_trajectories=n_trajectories or config.n_trajectories,
                                           initial=correlations.STEADY_STATE, sde=_sde(config),
                                           warmup_time=config.warmup)


def _result_rows(result):
    return [(t, z.real, z.imag, e) for t, z, e in zip(result.grid, result.mean, result.std_error)]


def decay_element(config):
    model = config.model()
    phi0, psi0 = decay_element_kets()
    _, sigma_plus, _ = two_level_builders()
    grid = config.grid

    result = _matrix_element(config, sigma_plus, phi0, psi0, model, grid)
    reference = master.regression_matrix_element(sigma_plus, phi0, psi0, model, grid)

    return Outcome(result=result, reference=reference, tables={}, reports={})


def fluorescence_g1(config):
    model = config.model()
    request = _g1_request(config)
    if config.unraveling == Unraveling.JUMP.value:
        result = jumps.jump_correlate(request, model, seed=config.seed, workers=config.workers)
    else:
        result = correlations.correlate(request, model, seed=config.seed, workers=config.workers)

    reference = master.oracle_two_time(request.operator_a, request.operator_b, model, 0.0, config.grid)

    return Outcome(result=result, reference=reference, tables={}, reports={})


def _deviation(result, reference):
    """Largest |mean - reference| in units of the standard error"""
    with np.errstate(divide='ignore', invalid='ignore'):
        ratio = np.abs(result.mean - reference) / result.std_error

    return float(np.nanmax(ratio)) if np.any(np.isfinite(ratio)) else float('inf')


def gisin_compare(config):
    """The doubled-space estimate next to the coupled pair scheme at every step size"""
    model = config.model()
    phi0, psi0 = decay_element_kets()
    _, sigma_plus, _ = two_level_builders()
    grid = config.grid

    result = _matrix_element(config, sigma_plus, phi0, psi0, model, grid)
    reference = master.regression_matrix_element(sigma_plus, phi0, psi0, model, grid)
    analytic = master.analytic_decay_element(grid, gamma=config.gamma)

    tables = {'analytic.csv': (REFERENCE_FIELDS, [(t, z, 0.0) for t, z in zip(grid, analytic)])}
    doubled_report = gisin.instability_report(result).to_dict()
    doubled_report['max_deviation_in_std_errors'] = _deviation(result, reference)
    reports = {'doubled_space': doubled_report, 'gisin': []}

    for h in config.step_sizes:
        coupled = gisin.gisin_element(sigma_plus, phi0, psi0, model, grid, config.n_trajectories, dt=h,
                                      variant=config.gisin_variant, seed=config.seed, workers=config.workers)
        tables['gisin_h%g.csv' % h] = (RESULT_FIELDS, _result_rows(coupled))

        report = gisin.instability_report(coupled).to_dict()
        report['step_size'] = h
        report['max_deviation_in_std_errors'] = _deviation(coupled, reference)
        reports['gisin'].append(report)
        logger.info('%s at h=%g: %d aborted, largest deviation %.1f standard errors', coupled.method, h,
                    coupled.n_aborted, report['max_deviation_in_std_errors'])

    return Outcome(result=result, reference=reference, tables=tables, reports={'gisin_report.json': reports})


def benchmark(config):
    """Error against cost of the diffusion and jump unravelings on the fluorescence problem"""
    model = config.model()
    request = _g1_request(config, n_trajectories=max(config.n_list))
    jump_request = request._replace(sde=qsd.SdeConfig(dt=config.dt))
    tasks = {
        Unraveling.QSD.value: lambda streams: correlations.correlation_samples(request, model, streams),
        Unraveling.JUMP.value: lambda streams: correlations.correlation_samples(
            jump_request, model, streams, propagator=jumps.propagate_jumps),
    }
    reference = master.oracle_two_time(request.operator_a, request.operator_b, model, 0.0, config.grid)

    results = {}
    points = benchmark_sweep(tasks, reference, config.n_list, methods=config.methods, seed=config.seed,
                             workers=config.workers, grid=config.grid, results=results)

    tables = {'benchmark.csv': (BENCHMARK_FIELDS, [tuple(point) for point in points])}
    return Outcome(result=results[config.methods[0], max(config.n_list)], reference=reference, tables=tables,
                   reports={'benchmark_report.json': benchmark_report(points).to_dict()})


def custom(config):
    model = config.model()
    operator = config.operator(config.observable)
    phi0, psi0 = Ket.normalize(config.phi0), Ket.normalize(config.psi0)
    grid = config.grid

    result = _matrix_element(config, operator, phi0, psi0, model, grid)
    reference = master.regression_matrix_element(operator, phi0, psi0, model, grid)

    return Outcome(result=result, reference=reference, tables={}, reports={})


SCENARIOS = {
    Scenario.DECAY_ELEMENT: decay_element,
    Scenario.FLUORESCENCE_G1: fluorescence_g1,
    Scenario.GISIN_COMPARE: gisin_compare,
    Scenario.BENCHMARK: benchmark,
    Scenario.CUSTOM: custom,
}


def describe_version():
    """`git describe` of the working tree, the package version outside a checkout"""
    try:
        described = subprocess.check_output(['git', 'describe', '--always', '--dirty'], stderr=subprocess.DEVNULL,
                                            cwd=os.path.dirname(os.path.abspath(__file__)))
    except (subprocess.CalledProcessError, FileNotFoundError, OSError):
        return __version__

    return described.decode('utf-8').strip() or __version__


def _write_csv(path, header, rows):
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f)
        writer.writerow(header)
        writer.writerows([[float(value) if isinstance(value, (float, np.floating)) else value for value in row]
                          for row in rows])


def _write_json(path, obj):
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write('\n')


def _metadata(config, outcome, wall_time):
    result = outcome.result
    return {
        'scenario': config.scenario,
        'method': result.method,
        'seed': config.seed,
        'dt': config.dt,
        'n': result.n,
        'n_aborted': result.n_aborted,
        'workers': config.workers,
        'wall_time_seconds': wall_time,
        'ensemble_wall_time_seconds': result.wall_time_seconds,
        'core_seconds': result.core_seconds,
        'draws_total': result.draws_total,
        'draws_per_trajectory': result.draws_total / result.n,
        'version': describe_version(),
        'config': config.to_dict(),
    }


def _failure_report(config, exc):
    report = {'scenario': config.scenario, 'error': type(exc).__name__, 'message': str(exc), 'failures': []}
    for first, last, failure in getattr(exc, 'failures', []):
        report['failures'].append({'first_trajectory': first, 'last_trajectory': last,
                                   'error': type(failure).__name__, 'message': str(failure)})

    return report


def _numerical(exc):
    if isinstance(exc, EnsembleError):
        return all(isinstance(failure, NUMERICAL_FAILURES) for _, _, failure in exc.failures)

    return isinstance(exc, NUMERICAL_FAILURES)


def run(config):
    """Execute the configured scenario and write its outputs; returns the exit status"""
    logger.info('Scenario %s, %d trajectories, dt=%g, seed=%d', config.scenario, config.n_trajectories,
                config.dt, config.seed)
    start = time.perf_counter()
    try:
        outcome = SCENARIOS[config.scenario_kind](config)
    except (EnsembleError,) + NUMERICAL_FAILURES as exc:
        if not _numerical(exc):
            raise

        os.makedirs(config.output, exist_ok=True)
        path = os.path.join(config.output, 'instability.json')
        _write_json(path, _failure_report(config, exc))
        logger.error('Numerical failure: %s', exc)
        print('Instability report written to %s' % path)

        return EXIT_NUMERICAL

    wall_time = time.perf_counter() - start

    os.makedirs(config.output, exist_ok=True)
    result = outcome.result
    _write_csv(os.path.join(config.output, 'results.csv'), RESULT_FIELDS, _result_rows(result))
    _write_csv(os.path.join(config.output, 'reference.csv'), REFERENCE_FIELDS,
               [(t, z.real, z.imag) for t, z in zip(result.grid, np.asarray(outcome.reference, dtype=complex))])
    for name, (header, rows) in outcome.tables.items():
        _write_csv(os.path.join(config.output, name), header, rows)
    for name, obj in outcome.reports.items():
        _write_json(os.path.join(config.output, name), obj)
    _write_json(os.path.join(config.output, 'metadata.json'), _metadata(config, outcome, wall_time))

    logger.info('Wrote %s in %.3f s', config.output, wall_time)

    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog='simulate',
                                     description='Heisenberg picture matrix elements and correlations from '
                                                 'quantum trajectories in a doubled Hilbert space')
    parser.add_argument('--config', required=True, help='JSON run configuration')
    parser.add_argument('--seed', type=int, default=None)
    parser.add_argument('--n', type=int, default=None, dest='n_trajectories', help='Number of trajectories')
    parser.add_argument('--dt', type=float, default=None, help='Integration step size')
    parser.add_argument('--unraveling', choices=[u.value for u in Unraveling], default=None)
    parser.add_argument('--workers', type=int, default=None)
    parser.add_argument('--out', default=None, dest='output', help='Output directory')
    parser.add_argument('-v', '--verbose', action='store_true', help='Log at DEBUG level')

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format='%(asctime)s %(name)s %(levelname)s %(message)s')

    overrides = {name: getattr(args, name) for name in ('seed', 'n_trajectories', 'dt', 'unraveling', 'workers',
                                                        'output')}
    try:
        config = run_config.load(args.config, overrides=overrides)
    except ConfigError as exc:
        for error in exc.errors:
            print('%s: %s' % (args.config, error), file=sys.stderr)

        return EXIT_CONFIG

    return run(config)


if __name__ == '__main__':
    sys.exit(main())
