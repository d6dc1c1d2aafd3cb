"""
Shared fixtures: small grids, model parameters and admissible random fields.
"""

import numpy as np
import pytest

from core.initial_conditions import random_qtensor, random_velocity
from core.qtensor_model import ModelParams
from core.spectral_core import Grid


@pytest.fixture
def grid2():
    return Grid(d=2, n_axis=32)


@pytest.fixture
def grid3():
    return Grid(d=3, n_axis=16)


@pytest.fixture
def params():
    return ModelParams(a=0.3, b=0.5, c=1.0, L=1.0, gamma=1.0, nu=1.0, lam=1.0, xi=0.5, d_target=3)


@pytest.fixture
def params_xi0():
    return ModelParams(a=0.3, b=0.5, c=1.0, L=1.0, gamma=1.0, nu=1.0, lam=1.0, xi=0.0, d_target=3)


@pytest.fixture
def fields2(grid2):
    """(Q, u) on the 2D grid with 3x3 Q and low modes only."""
    Q = random_qtensor(grid2, 3, [7, 0], 0.3, 3)
    u = random_velocity(grid2, [7, 1], 0.3, 3)
    return Q, u


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
