# -*- coding: utf-8 -*-
"""Shared enumerations, exceptions and decorators"""
import enum
import functools

import numpy as np

__all__ = ['Scheme', 'Unraveling', 'Scenario', 'GisinVariant',
           'ConfigError', 'InstabilityError', 'RealizationAborted', 'DegenerateSteadyStateError',
           'JumpProbabilityError', 'complex_array', 'state_vector']


class Scheme(enum.Enum):
    NORMALIZED = 'normalized'
    QUASI_LINEAR = 'quasi_linear'


class Unraveling(enum.Enum):
    QSD = 'qsd'
    JUMP = 'jump'


class Scenario(enum.Enum):
    DECAY_ELEMENT = 'decay-element'
    FLUORESCENCE_G1 = 'fluorescence-g1'
    GISIN_COMPARE = 'gisin-compare'
    BENCHMARK = 'benchmark'
    CUSTOM = 'custom'


class GisinVariant(enum.Enum):
    UNITY_PRESERVING = 'unity_preserving'
    QUASI_LINEAR = 'quasi_linear'


class ConfigError(ValueError):
    """A run configuration failed validation

    `errors` holds one "field: message" string per problem found.
    """
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__('; '.join(self.errors))


class InstabilityError(ArithmeticError):
    """The propagated state left the representable range"""


class RealizationAborted(InstabilityError):
    """A realization hit a vanishing denominator and was given up"""


class DegenerateSteadyStateError(ValueError):
    def __init__(self, multiplicity):
        self.multiplicity = multiplicity
        super().__init__('Liouvillian null space has dimension %d, expected 1' % multiplicity)


class JumpProbabilityError(ValueError):
    """The first-order jump probability of a substep is too large"""


def complex_array(func):
    """Return the wrapped value as a read-only complex ndarray"""
    @functools.wraps(func)
    def converter(*args, **kwargs):
        arg = np.array(func(*args, **kwargs), dtype=complex)
        arg.setflags(write=False)

        return arg

    return converter


def state_vector(func):
    """Let a stepping function accept state objects as well as raw arrays

    Objects exposing `vector` and a `from_vector` constructor (Ket, DoubledState) are
    unwrapped before the call and the result is wrapped back into the same type.
    """
    @functools.wraps(func)
    def converter(state, *args, **kwargs):
        from_vector = getattr(type(state), 'from_vector', None)
        if from_vector is None:
            return func(np.asarray(state, dtype=complex), *args, **kwargs)

        return from_vector(func(state.vector, *args, **kwargs))

    return converter
