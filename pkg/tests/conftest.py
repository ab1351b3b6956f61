import pytest

from cltflow import GridSpec, bank


@pytest.fixture(scope="session")
def gauss():
    return bank.gaussian()


@pytest.fixture(scope="session")
def rademacher():
    return bank.rademacher()


@pytest.fixture(scope="session")
def skewed():
    return bank.skewed_two_atom()


@pytest.fixture(scope="session")
def q3_bank():
    return bank.q3_bank()


@pytest.fixture(scope="session")
def q2_bank():
    return bank.q2_bank()


@pytest.fixture(scope="session")
def grid():
    return GridSpec()


@pytest.fixture(scope="session")
def coarse_grid():
    # enough resolution for structural checks, fast enough for sweeps
    return GridSpec(1e-3, 50.0, 40)
