import pytest

from detrelay import GainProfile, RateTuple, reduce_network


@pytest.fixture
def ex1():
    """Worked instance 1: single-cycle detour territory."""
    gains = GainProfile((11, 5, 7, 1), (2, 8, 5, 11))
    rates = RateTuple((2, 0, 1, 2, 0, 2, 1, 1, 1, 0, 1, 0, 0, 0, 0, 1, 1, 1, 1, 1))
    return gains, rates


@pytest.fixture
def ex2():
    """Worked instance 2: two-cycle detour territory."""
    gains = GainProfile((11, 10, 5, 3), (3, 6, 10, 11))
    rates = RateTuple((2, 1, 0, 1, 0, 2, 1, 0, 0, 0, 1, 1, 2, 0, 0, 1, 0, 2, 1, 1))
    return gains, rates


@pytest.fixture
def ex1_reduced(ex1):
    return reduce_network(*ex1)


@pytest.fixture
def ex2_reduced(ex2):
    return reduce_network(*ex2)
