import numpy as np
import pytest

from vpblab import CollisionModel, HermiteBasis


@pytest.fixture(scope="session")
def basis4():
    return HermiteBasis(4)


@pytest.fixture(scope="session")
def basis6():
    return HermiteBasis(6)


@pytest.fixture(scope="session")
def basis8():
    return HermiteBasis(8)


@pytest.fixture(scope="session")
def model6(basis6):
    return CollisionModel(basis6)


@pytest.fixture(scope="session")
def model8(basis8):
    return CollisionModel(basis8)


@pytest.fixture(scope="session")
def relax6(basis6):
    return CollisionModel(basis6, weight="unit")


@pytest.fixture()
def rng():
    return np.random.default_rng(20240811)
