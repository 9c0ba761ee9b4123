import math

import numpy as np
import pytest

from compact_kg.grid import PeriodicGrid
from compact_kg.problems import trig_gamma, trig_phi, trig_phi_xx
from compact_kg.schemes import ProblemSpec


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def torus(M):
    return PeriodicGrid(0.0, 2.0 * math.pi, M)


def trig_spec(M=32, eps=1.0, p=2, **kw):
    return ProblemSpec(torus(M), eps, p, trig_phi, trig_gamma, trig_phi_xx, label="trig:torus", **kw)


def const_fn(c):
    return lambda x: np.full_like(x, c)
