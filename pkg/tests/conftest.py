import numpy as np
import pytest

from fraclap.exponents import find_tau0
from fraclap.grid import Grid1D
from fraclap.operator import assemble


@pytest.fixture(scope="session")
def kc05():
    return find_tau0(0.5)


@pytest.fixture(scope="session")
def kc_by_alpha():
    return {a: find_tau0(a) for a in (0.25, 0.5, 0.75)}


@pytest.fixture(scope="session")
def grid301():
    return Grid1D.graded(301, 3.0)


@pytest.fixture(scope="session")
def op301(grid301):
    return assemble(grid301, 0.5)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
