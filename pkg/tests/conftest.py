from fractions import Fraction

import pytest
from hypothesis import settings

from topofractal.denjoy import build_blowup, lift_maps
from topofractal.systems import build_cantor_interval_system, build_circle_system, orbit_Q

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def structured():
    return build_cantor_interval_system()


@pytest.fixture(scope="session")
def circle():
    return build_circle_system()


@pytest.fixture(scope="session")
def orbit8(circle):
    return orbit_Q(8, circle)


@pytest.fixture(scope="session")
def lifted4(circle):
    return lift_maps(build_blowup(4, Fraction(1), circle), circle)


@pytest.fixture(scope="session")
def lifted1(circle):
    return lift_maps(build_blowup(1, Fraction(1), circle), circle)
