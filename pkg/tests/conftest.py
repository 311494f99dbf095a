import numpy as np
import pytest

from nlwqed import LatticeSpec, small_atom


@pytest.fixture
def lattice():
    return LatticeSpec(n_sites=64, hopping=1.0, nonlinearity=6.0)


@pytest.fixture
def big_lattice():
    return LatticeSpec(n_sites=512, hopping=1.0, nonlinearity=6.0)


@pytest.fixture
def emitter():
    return small_atom(32, 0.3, -6.633)


@pytest.fixture
def rng():
    return np.random.RandomState(20260811)
