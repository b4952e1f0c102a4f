import pytest

from fkfermion.lattice import build_domain
from fkfermion.measures import ModelParams


@pytest.fixture(scope="session")
def d2():
    return build_domain(2, 2)


@pytest.fixture(scope="session")
def d3():
    return build_domain(3, 3)


@pytest.fixture(scope="session")
def crit():
    return ModelParams.critical()
