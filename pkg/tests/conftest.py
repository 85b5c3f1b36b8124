import json
import math

import pytest

from models import RelaxationParams, SpinSystem


@pytest.fixture
def pair_system():
    """delta = 3.71 ppm pair: J = 17.5 Hz, dnu = 2.15 Hz"""
    return SpinSystem.from_pair(17.5, 2.15)


@pytest.fixture
def m2s_system():
    return SpinSystem.from_pair(17.4, 2.8)


@pytest.fixture
def pair_relaxation():
    return RelaxationParams(T1=0.912, TS=25.1)


@pytest.fixture
def t_slic():
    return 1.0 / (math.sqrt(2) * 2.15)


@pytest.fixture
def write_config(tmp_path):
    """Dump a run configuration dict to a JSON file and return its path"""
    def _write(data, name='run.json'):
        path = tmp_path / name
        path.write_text(json.dumps(data, indent=2), encoding='utf-8')
        return path
    return _write
