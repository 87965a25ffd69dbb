import numpy as np
import pytest

from eplab.dyadic import build_cutoffs
from eplab.model import Params
from eplab.spectral import Grid


@pytest.fixture(scope="session")
def grid2d():
    return Grid(2, 64)


@pytest.fixture(scope="session")
def cutoffs2d(grid2d):
    return build_cutoffs(grid2d)


@pytest.fixture(scope="session")
def grid3d():
    return Grid(3, 16)


@pytest.fixture(scope="session")
def params_ref():
    """Reference parameters: psi_bar = sqrt(2), c = 1/sqrt(2)."""
    return Params(A=1.0, gamma=2.0, tau=0.5, n_bar=1.0, dim=2)


@pytest.fixture(scope="session")
def params_iso():
    """Isothermal reference: psi_bar = 1, c = 1."""
    return Params(A=1.0, gamma=1.0, tau=0.5, n_bar=1.0, dim=2)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
