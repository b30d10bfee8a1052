import os

import numpy as np
import pytest

from src.environment.instance_io import load_instance
from src.environment.model import EnvironmentSpec, RngStreams
from src.utils.common import get_fixtures_dir

# Solver budget for tests; the polish step makes results exact well below the default.
FAST_SOLVER_ITER = 20_000


def fixture_path(name):
    return os.path.join(get_fixtures_dir(), name)


@pytest.fixture
def blocked_target():
    return load_instance(fixture_path("blocked_target.json"), allow_unnormalized=True)


@pytest.fixture
def blocked_target_two_arm():
    return load_instance(fixture_path("blocked_target_two_arm.json"), allow_unnormalized=True)


@pytest.fixture
def near_collinear():
    return load_instance(fixture_path("near_collinear.json"), allow_unnormalized=True)


@pytest.fixture
def near_collinear_attackable():
    return load_instance(fixture_path("near_collinear_attackable.json"), allow_unnormalized=True)


@pytest.fixture
def standard_basis_env():
    """Arms e1, e2 with theta* = e1 and target e1, noiseless."""
    return EnvironmentSpec(arms=np.eye(2), target_index=0, theta_star=[1.0, 0.0], noise_sigma=0.0)


@pytest.fixture
def rng():
    return RngStreams(1234)


@pytest.fixture
def faint_target():
    return load_instance(fixture_path("faint_target.json"))
