import numpy as np
import pytest

from dysonlab.lattice import LatticeGrid, random_field
from dysonlab.potential import sample_potential
from dysonlab.rng import Stream


@pytest.fixture
def grid1d():
    return LatticeGrid(1, 8)


@pytest.fixture
def grid2d():
    return LatticeGrid(2, 8)


@pytest.fixture
def pot1d(grid1d):
    return sample_potential(grid1d, 3, "gaussian", 11)


@pytest.fixture
def pot2d(grid2d):
    return sample_potential(grid2d, 3, "gaussian", 21)


@pytest.fixture
def psi1d(grid1d):
    return random_field(grid1d, Stream(3))


@pytest.fixture
def psi2d(grid2d):
    return random_field(grid2d, Stream(5))


def l2(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b))
