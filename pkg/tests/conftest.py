import numpy as np
import pytest

from torus_coulomb.greens import compute_green
from torus_coulomb.lattice import TorusLattice


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def lat4():
    return TorusLattice(4)


@pytest.fixture
def lat6():
    return TorusLattice(6)


@pytest.fixture(scope="session")
def green3():
    return compute_green(3)


@pytest.fixture(scope="session")
def green4():
    return compute_green(4)


@pytest.fixture(scope="session")
def green8():
    return compute_green(8)
