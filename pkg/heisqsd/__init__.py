# -*- coding: utf-8 -*-
"""The heisqsd package - Heisenberg picture quantum trajectories

Matrix elements <phi0|A(t)|psi0> and two-time correlation functions of open quantum
systems, estimated from stochastic trajectories in the doubled Hilbert space H + H and
checked against a dense master equation integrator.

Example code:
    >>> import numpy as np
    >>> import heisqsd
    >>> model = heisqsd.hilbert.decay_model(gamma=1.0)
    >>> phi0, psi0 = heisqsd.hilbert.decay_element_kets()
    >>> _, sigma_plus, _ = heisqsd.hilbert.two_level_builders()
    >>> grid = np.linspace(0.5, 2.0, 4)
    >>> result = heisqsd.correlations.heisenberg_element(sigma_plus, phi0, psi0, model, grid,
    ...                                                  n_trajectories=1000, seed=7)
    >>> exact = heisqsd.master.analytic_decay_element(grid)
    >>> bool(np.all(np.abs(result.mean - exact) < 4 * result.std_error))
    True
"""
__version__ = '1.0.0'

from . import commons
from . import hilbert
from . import noise
from . import ensemble
from . import master
from . import qsd
from . import correlations
from . import jumps
from . import gisin
from . import config
from . import cli


__all__ = ['commons', 'hilbert', 'noise', 'ensemble', 'master', 'qsd', 'correlations', 'jumps', 'gisin',
           'config', 'cli', '__version__']
