import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_channel_state(rng):
    """Uniform draw from the valid (lambda1, lambda2) region."""
    l1 = rng.uniform(-1.0, 1.0)
    cap = (1.0 + l1) / 2.0
    return l1, rng.uniform(-cap, cap)
