# -*- coding: utf-8 -*-
"""The run configuration module

A run is described by one JSON object. `validate` checks it against the schema of
its scenario, fills the defaults and returns an immutable RunConfig; every problem
found is reported at once through ConfigError.errors.

Example:
    {"scenario": "decay-element", "n_trajectories": 1000, "dt": 0.001}
"""
import json
from collections import namedtuple

import numpy as np

from .commons import ConfigError, GisinVariant, Scenario, Scheme, Unraveling
from .hilbert import LindbladModel, Operator, decay_model, fluorescence_model, two_level_builders

__all__ = ['RunConfig', 'COMMON_DEFAULTS', 'SCENARIO_DEFAULTS', 'NAMED_OPERATORS', 'validate', 'load',
           'parse_complex', 'parse_matrix']

COMMON_DEFAULTS = {
    'seed': 0,
    'n_trajectories': 1000,
    'dt': 1e-3,
    'unraveling': Unraveling.QSD.value,
    'scheme': Scheme.NORMALIZED.value,
    'workers': 1,
    'output': 'out',
}

SCENARIO_DEFAULTS = {
    Scenario.DECAY_ELEMENT: {'gamma': 1.0, 't_max': 4.0, 'n_nodes': 40},
    Scenario.FLUORESCENCE_G1: {'gamma': 1.0, 'omega': 10.0, 'warmup': 30.0, 'tau_max': 3.0, 'n_nodes': 31},
    Scenario.GISIN_COMPARE: {'gamma': 1.0, 't_max': 1.0, 'n_nodes': 10, 'step_sizes': [0.01, 0.001, 0.0001],
                             'gisin_variant': GisinVariant.QUASI_LINEAR.value},
    Scenario.BENCHMARK: {'gamma': 1.0, 'omega': 10.0, 'warmup': 30.0, 'tau_max': 3.0, 'n_nodes': 31,
                         'n_list': [250, 500, 1000], 'methods': [u.value for u in Unraveling]},
    Scenario.CUSTOM: {'lindblads': [], 't_max': 4.0, 'n_nodes': 40},
}

# Keys without a default that the scenario cannot run without
REQUIRED = {
    Scenario.CUSTOM: ('dim', 'hamiltonian', 'observable', 'phi0', 'psi0'),
}

NAMED_OPERATORS = ('sigma_minus', 'sigma_plus', 'identity')

FIELDS = ('scenario', 'seed', 'n_trajectories', 'dt', 'unraveling', 'scheme', 'workers', 'output', 'n_nodes',
          'gamma', 'omega', 'warmup', 't_max', 'tau_max', 'step_sizes', 'gisin_variant', 'n_list', 'methods',
          'dim', 'hamiltonian', 'lindblads', 'observable', 'phi0', 'psi0')

# Grids that start at the origin; the others start one spacing after it
ORIGIN_GRIDS = (Scenario.FLUORESCENCE_G1, Scenario.BENCHMARK)


def _applicable(scenario):
    return set(COMMON_DEFAULTS) | {'scenario'} | set(SCENARIO_DEFAULTS[scenario]) | set(REQUIRED.get(scenario, ()))


def _to_json(value):
    """Complex entries become [re, im] pairs, real ones stay numbers"""
    if isinstance(value, (np.ndarray, list, tuple)):
        return [_to_json(item) for item in value]
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)] if value.imag else float(value.real)

    return value


class RunConfig(namedtuple('RunConfig', FIELDS)):
    """A validated run configuration

    Fields that do not apply to the scenario are None. Matrices and kets are complex
    ndarrays; named operators are kept by name and resolved by `operator`.
    """
    __slots__ = ()

    @property
    def scenario_kind(self):
        return Scenario(self.scenario)

    @property
    def grid(self):
        """The time (or delay) nodes the scenario reports on"""
        span = self.tau_max if self.tau_max is not None else self.t_max
        if self.scenario_kind in ORIGIN_GRIDS:
            return np.linspace(0.0, span, self.n_nodes)

        return span * np.arange(1, self.n_nodes + 1) / self.n_nodes

    def operator(self, value):
        """Resolve a matrix or a named operator against this configuration's dimension"""
        if isinstance(value, str):
            return _named_operator(value, self.dim or 2)

        return Operator(value)

    def model(self):
        kind = self.scenario_kind
        if kind is Scenario.CUSTOM:
            return LindbladModel(hamiltonian=self.hamiltonian, lindblads=[self.operator(L) for L in self.lindblads])
        if kind is Scenario.DECAY_ELEMENT or kind is Scenario.GISIN_COMPARE:
            return decay_model(gamma=self.gamma)

        return fluorescence_model(omega=self.omega, gamma=self.gamma)

    def to_dict(self):
        """The effective configuration, JSON serializable"""
        applicable = _applicable(self.scenario_kind)
        return {name: _to_json(value) for name, value in self._asdict().items() if name in applicable}


def _named_operator(name, dim):
    if name == 'identity':
        return Operator(np.eye(dim))

    sigma_minus, sigma_plus, _ = two_level_builders()
    return sigma_minus if name == 'sigma_minus' else sigma_plus


def parse_complex(value):
    """A JSON number or an [re, im] pair as a complex number"""
    if isinstance(value, bool):
        raise ValueError('expected a number, got %r' % (value,))
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(
            isinstance(part, (int, float)) and not isinstance(part, bool) for part in value):
        return complex(value[0], value[1])

    raise ValueError('expected a number or an [re, im] pair, got %r' % (value,))


def parse_vector(value, dim):
    if not isinstance(value, list) or len(value) != dim:
        raise ValueError('expected a list of %d entries' % dim)

    return np.array([parse_complex(entry) for entry in value], dtype=complex)


def parse_matrix(value, dim):
    """A list of `dim` rows of complex entries as a (dim, dim) ndarray"""
    if not isinstance(value, list) or len(value) != dim:
        raise ValueError('expected %d rows' % dim)

    return np.array([parse_vector(row, dim) for row in value], dtype=complex)


def _integer(minimum):
    def check(value):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValueError('expected an integer, got %r' % (value,))
        if value < minimum:
            raise ValueError('must be at least %d, got %d' % (minimum, value))
        return value

    return check


def _real(positive=True):
    def check(value):
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not np.isfinite(value):
            raise ValueError('expected a finite number, got %r' % (value,))
        if positive and value <= 0:
            raise ValueError('must be positive, got %r' % (value,))
        if not positive and value < 0:
            raise ValueError('must be nonnegative, got %r' % (value,))
        return float(value)

    return check


def _choice(enum):
    def check(value):
        try:
            return enum(value).value
        except ValueError:
            raise ValueError('expected one of %s, got %r' % (', '.join(e.value for e in enum), value))

    return check


def _dt(value):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not np.isfinite(value):
        raise ValueError('expected a finite number, got %r' % (value,))
    if value <= 0:
        raise ValueError('dt must be positive')
    return float(value)


def _output(value):
    if not isinstance(value, str) or not value:
        raise ValueError('expected a non-empty path')
    return value


def _non_empty_list(item):
    def check(value):
        if not isinstance(value, list) or not value:
            raise ValueError('expected a non-empty list')
        return [item(entry) for entry in value]

    return check


def _methods(value):
    methods = _non_empty_list(_choice(Unraveling))(value)
    if len(set(methods)) != len(methods):
        raise ValueError('methods repeat')
    return methods


SCALAR_CHECKS = {
    'seed': _integer(0),
    'n_trajectories': _integer(2),
    'dt': _dt,
    'unraveling': _choice(Unraveling),
    'scheme': _choice(Scheme),
    'workers': _integer(1),
    'output': _output,
    'n_nodes': _integer(1),
    'gamma': _real(),
    'omega': _real(positive=False),
    'warmup': _real(positive=False),
    't_max': _real(),
    'tau_max': _real(),
    'step_sizes': _non_empty_list(_dt),
    'gisin_variant': _choice(GisinVariant),
    'n_list': _non_empty_list(_integer(2)),
    'methods': _methods,
    'dim': _integer(1),
}


def _commensurate(length, dt):
    steps = round(length / dt)
    return steps >= 1 and abs(steps * dt - length) <= 1e-9 * max(1.0, length)


def _operator_field(value, dim):
    if isinstance(value, str):
        if value not in NAMED_OPERATORS:
            raise ValueError('unknown operator %r, expected a matrix or one of %s'
                             % (value, ', '.join(NAMED_OPERATORS)))
        if value != 'identity' and dim != 2:
            raise ValueError('%s needs dim 2' % value)
        return value

    return parse_matrix(value, dim)


def _check_model(values, errors):
    dim = values.get('dim')
    if not isinstance(dim, int):
        return

    def field(name, parse):
        if name not in values:
            return
        try:
            values[name] = parse(values[name])
        except ValueError as exc:
            errors.append('%s: %s' % (name, exc))
            values.pop(name)

    field('hamiltonian', lambda value: parse_matrix(value, dim))
    field('observable', lambda value: _operator_field(value, dim))
    field('phi0', lambda value: parse_vector(value, dim))
    field('psi0', lambda value: parse_vector(value, dim))

    lindblads = values.get('lindblads')
    if not isinstance(lindblads, list):
        errors.append('lindblads: expected a list')
    else:
        parsed = []
        for index, value in enumerate(lindblads):
            try:
                parsed.append(_operator_field(value, dim))
            except ValueError as exc:
                errors.append('lindblads[%d]: %s' % (index, exc))
        values['lindblads'] = parsed

    hamiltonian = values.get('hamiltonian')
    if isinstance(hamiltonian, np.ndarray) and not Operator(hamiltonian).is_hermitian():
        errors.append('hamiltonian: not Hermitian')

    for name in ('phi0', 'psi0'):
        ket = values.get(name)
        if isinstance(ket, np.ndarray):
            norm = np.linalg.norm(ket)
            if norm == 0:
                errors.append('%s: zero norm' % name)
            else:
                values[name] = ket / norm


def _check_grids(scenario, values, errors):
    if scenario in ORIGIN_GRIDS and values.get('n_nodes') == 1:
        errors.append('n_nodes: a delay grid needs at least 2 nodes')
        return

    span = values.get('tau_max', values.get('t_max'))
    n_nodes = values.get('n_nodes')
    if not isinstance(span, float) or not isinstance(n_nodes, int):
        return

    spacing = span / (n_nodes - 1) if scenario in ORIGIN_GRIDS else span / n_nodes
    step_sizes = [values['dt']] if isinstance(values.get('dt'), float) else []
    step_sizes += values.get('step_sizes', []) if isinstance(values.get('step_sizes'), list) else []
    for dt in step_sizes:
        if not _commensurate(spacing, dt):
            errors.append('n_nodes: grid spacing %g is not a multiple of the step size %g' % (spacing, dt))

    warmup = values.get('warmup')
    if isinstance(warmup, float) and warmup > 0 and isinstance(values.get('dt'), float) \
            and not _commensurate(warmup, values['dt']):
        errors.append('warmup: %g is not a multiple of dt %g' % (warmup, values['dt']))


def validate(text, overrides=None):
    """Parse and check a JSON run configuration

    `overrides` maps field names to values that replace the file's (command-line
    flags); None values are ignored. Returns a RunConfig or raises ConfigError.
    """
    try:
        raw = json.loads(text)
    except (TypeError, ValueError) as exc:
        raise ConfigError(['config: not valid JSON (%s)' % exc])

    if not isinstance(raw, dict):
        raise ConfigError(['config: expected a JSON object'])

    raw = dict(raw)
    raw.update({name: value for name, value in (overrides or {}).items() if value is not None})

    if 'scenario' not in raw:
        raise ConfigError(['scenario: missing, expected one of %s' % ', '.join(s.value for s in Scenario)])
    try:
        scenario = Scenario(raw['scenario'])
    except ValueError:
        raise ConfigError(['scenario: unknown scenario %r' % (raw['scenario'],)])

    errors = []
    applicable = _applicable(scenario)
    for name in sorted(raw):
        if name not in FIELDS:
            errors.append('%s: unknown key' % name)
        elif name not in applicable:
            errors.append('%s: not applicable to scenario %s' % (name, scenario.value))
    for name in REQUIRED.get(scenario, ()):
        if name not in raw:
            errors.append('%s: required by scenario %s' % (name, scenario.value))

    values = dict(COMMON_DEFAULTS)
    values.update(SCENARIO_DEFAULTS[scenario])
    values.update({name: value for name, value in raw.items() if name in applicable})
    values['scenario'] = scenario.value

    for name, check in SCALAR_CHECKS.items():
        if name not in values:
            continue
        try:
            values[name] = check(values[name])
        except ValueError as exc:
            errors.append('%s: %s' % (name, exc))
            values.pop(name)

    if scenario is Scenario.CUSTOM:
        _check_model(values, errors)
    _check_grids(scenario, values, errors)

    if errors:
        raise ConfigError(errors)

    return RunConfig(**{name: values.get(name) for name in FIELDS})


def load(path, overrides=None):
    """Read and validate a configuration file"""
    try:
        with open(path, encoding='utf-8') as f:
            text = f.read()
    except OSError as exc:
        raise ConfigError(['config: cannot read %s (%s)' % (path, exc.strerror)])

    return validate(text, overrides=overrides)
