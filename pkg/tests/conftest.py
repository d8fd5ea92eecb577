import numpy as np
import pytest

from absqm.numerics import DIRICHLET, Grid


@pytest.fixture
def grid():
    return Grid(-20.0, 20.0, 256)


@pytest.fixture
def fine_grid():
    return Grid(-20.0, 20.0, 512)


@pytest.fixture
def dirichlet_grid():
    return Grid(-12.0, 12.0, 192, DIRICHLET)


@pytest.fixture
def rng():
    return np.random.default_rng(20260823)
