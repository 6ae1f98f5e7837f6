import numpy as np
import pytest

from warpslice import make_cosh, make_ds_schwarzschild, make_euclidean


@pytest.fixture(scope="session")
def schw3():
    return make_ds_schwarzschild(3, 1.0, 0.0, 10.0)


@pytest.fixture(scope="session")
def schw3_m2():
    return make_ds_schwarzschild(3, 2.0, 0.0, 10.0)


@pytest.fixture(scope="session")
def schw4():
    return make_ds_schwarzschild(4, 1.0, 0.0, 10.0)


@pytest.fixture(scope="session")
def desitter3():
    return make_ds_schwarzschild(3, 1.0, 0.05, 10.0)


@pytest.fixture(scope="session")
def flat3():
    return make_euclidean(3, 10.0)


@pytest.fixture(scope="session")
def cosh3():
    return make_cosh(3, 1.0, r_max=2.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
