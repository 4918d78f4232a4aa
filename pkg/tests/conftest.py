import numpy as np
import pytest

from seaplan.scenario import canned_scenario, toy_scenario


@pytest.fixture(scope="session")
def canned():
    return canned_scenario()


@pytest.fixture(scope="session")
def toy():
    return toy_scenario()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
