import pytest

from elris.baseline import EconomicBasis, LifeCycle
from elris.mortality import GompertzLaw


@pytest.fixture(scope="session")
def base_law():
    return GompertzLaw(m=90.0, b=10.0)


@pytest.fixture(scope="session")
def impaired_law():
    return GompertzLaw(m=80.0, b=10.0)


@pytest.fixture(scope="session")
def life():
    return LifeCycle(x0=25.0, T=40.0)


@pytest.fixture(scope="session")
def basis():
    return EconomicBasis(r=0.01, rho=0.01, alpha=0.06, gamma=2.0)
