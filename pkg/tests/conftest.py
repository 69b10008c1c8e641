import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from triad_charts.kepler import MassConfig

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def masses():
    return MassConfig()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
