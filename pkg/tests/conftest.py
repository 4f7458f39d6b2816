import numpy as np
import pytest

from phi4sim.lattice import FrequencyLattice
from phi4sim.fields import field_from_cube


@pytest.fixture(scope="session")
def lat3_4():
    return FrequencyLattice(d=3, n=4)


@pytest.fixture(scope="session")
def lat3_8():
    return FrequencyLattice(d=3, n=8)


@pytest.fixture(scope="session")
def lat1_2():
    return FrequencyLattice(d=1, n=2)


def random_field(lattice, rng, scale=1.0):
    cube = rng.standard_normal(lattice.shape) + 1j * rng.standard_normal(lattice.shape)
    return field_from_cube(lattice, scale * cube)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
