"""Shared fixtures: solved profiles reused across test modules."""

import pytest

from wavestab.spectral import Grid
from wavestab.profile import solve_profile


@pytest.fixture(scope="session")
def profile_01():
    return solve_profile(0.1, 0.5, Grid(512, 40.0))


@pytest.fixture(scope="session")
def profile_02():
    return solve_profile(0.2, 0.5, Grid(512, 40.0))


@pytest.fixture(scope="session")
def profile_005():
    return solve_profile(0.05, 0.5, Grid(512, 40.0))


@pytest.fixture(scope="session")
def profile_01_quick():
    return solve_profile(0.1, 0.5, Grid(256, 40.0), tol=1e-11)
