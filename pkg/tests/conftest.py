import pytest

from src.scattering.completion import complete
from src.scattering.diagram import initial_diagram
from src.sources.cps_p2 import cps_p2_base
from src.sources.toy_two_wall import toy_two_wall_base


@pytest.fixture(scope="session")
def toy_base():
    return toy_two_wall_base()


@pytest.fixture(scope="session")
def toy_initial(toy_base):
    return initial_diagram(toy_base, 2)


@pytest.fixture(scope="session")
def toy_diagram(toy_initial):
    return complete(toy_initial, 2, threads=2)


@pytest.fixture(scope="session")
def cps_base():
    return cps_p2_base()


@pytest.fixture(scope="session")
def cps_initial(cps_base):
    return initial_diagram(cps_base, 1)


@pytest.fixture(scope="session")
def cps_d3(cps_base):
    return complete(initial_diagram(cps_base, 3), 3)


@pytest.fixture(scope="session")
def cps_d6(cps_base):
    return complete(initial_diagram(cps_base, 6), 6)
