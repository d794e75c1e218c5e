"""
Shared fixtures for the test suite.
"""
import pytest

from src.lti_model import collect_trajectory, consensus_example
from src.systems import siso_zero_system

from .helpers import collect_default


@pytest.fixture(scope="session")
def consensus():
    return consensus_example()


@pytest.fixture(scope="session")
def consensus_data(consensus):
    return collect_default(consensus, seed=0)


@pytest.fixture(scope="session")
def siso_half():
    """SISO system with the single zero 0.5."""
    return siso_zero_system([0.5], [0.2, -0.3])


@pytest.fixture(scope="session")
def siso_two_zeros():
    """SISO system with zeros 0.5 and -0.25."""
    return siso_zero_system([0.5, -0.25], [0.3, -0.1, 0.6])


@pytest.fixture(scope="session")
def siso_half_data(siso_half):
    return collect_default(siso_half, seed=1)


@pytest.fixture(scope="session")
def siso_half_trajectory(siso_half):
    return collect_trajectory(siso_half, seed=1)
