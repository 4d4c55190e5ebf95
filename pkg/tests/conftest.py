import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from zeroflip.harness import Box, preset, random_spec, trial_rng
from zeroflip.pwcore import ZeroProductSpec, build_from_zeros

settings.register_profile(
    "default", deadline=None, max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def sinc():
    return preset("sinc")


@pytest.fixture(scope="session")
def triangle():
    return preset("triangle")


@pytest.fixture(scope="session")
def zero3():
    return preset("zero3")


@pytest.fixture(scope="session")
def planted():
    """Unit-norm function with a zero at 0.4 + 0.9i."""
    return build_from_zeros(ZeroProductSpec((0.4 + 0.9j,), 4, 0.25))


def random_function(seed: int, L: float = 1.0, stream: int = 99):
    rng = trial_rng(seed, stream, 0)
    return build_from_zeros(random_spec(rng, L, Box((-2.0, 2.0), (0.1, 2.0))))


def random_point(seed: int, stream: int = 98, box=Box((-2.0, 2.0), (0.2, 2.0))):
    return box.draw(np.random.default_rng([seed, stream]))
