"""Shared fixtures: a small grid and a smooth Gaussian state."""

import numpy as np
import pytest

from src.fieldcore.grid import Grid
from tests.helpers import make_state


@pytest.fixture
def grid():
    return Grid.create(128, 50.0)


@pytest.fixture
def state(grid):
    return make_state(grid)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
