# -*- coding: utf-8 -*-
import os

JSON_DIR = os.path.join(os.path.dirname(__file__), 'json')

# Acceptance-size ensembles take minutes; they run only when this is set
LONG_TESTS = bool(os.environ.get('HEISQSD_LONG_TESTS'))


def fixture_path(name):
    return os.path.join(JSON_DIR, name)


def read_fixture(name, encoding='utf-8'):
    """The text of a JSON configuration fixture"""
    with open(fixture_path(name), encoding=encoding) as f:
        return f.read()
