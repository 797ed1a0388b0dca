import numpy as np
import pytest

from vmspod.fe_core import build_space
from vmspod.manufactured import ManufacturedProblem, generate_snapshots
from vmspod.pod import pod


@pytest.fixture(scope="session")
def problem():
    return ManufacturedProblem()


@pytest.fixture(scope="session")
def space8():
    return build_space(8)


@pytest.fixture(scope="session")
def space64():
    return build_space(64)


@pytest.fixture(scope="session")
def small_setup(space8, problem):
    """Coarse mesh, 21 snapshots: cheap enough for every unit test."""
    snaps = generate_snapshots(space8, problem, dT=5e-2, M=20)
    return snaps, pod(snaps)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
