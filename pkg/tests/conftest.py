import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_lengths(rng, n, bound=0.04):
    return rng.uniform(-bound, bound, size=(n, 3))
