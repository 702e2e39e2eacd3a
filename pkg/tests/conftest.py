import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_psd(rng, n, rank=None):
    A = crandn(rng, n, rank or n)
    return A @ A.conj().T


@pytest.fixture
def rng():
    return np.random.default_rng(20240531)
