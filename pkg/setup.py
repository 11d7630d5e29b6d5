#!/usr/bin/env python
# -*- coding: UTF-8 -*-
from setuptools import setup

setup(name='heisqsd',
      description='Heisenberg picture matrix elements and correlation functions from quantum state diffusion '
                  'in a doubled Hilbert space',
      version='1.0.0',
      packages=['heisqsd'],
      install_requires=['numpy>=1.17', 'scipy>=1.1'],
      entry_points={'console_scripts': ['simulate = heisqsd.cli:main']},
      test_suite='tests')
