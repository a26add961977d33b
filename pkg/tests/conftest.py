import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_in_ball(rng, n, dim, max_norm=0.95):
    """Points uniform in direction with norms uniform in [0, max_norm)."""
    x = rng.normal(size=(n, dim))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    return x * rng.uniform(0, max_norm, size=(n, 1))
