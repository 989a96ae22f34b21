import numpy as np
import pytest

from pointfield import PhysicalParams


@pytest.fixture
def ref():
    """Reference configuration: m = c = beta = 1, v0 = 0.5 (t_d = 2)."""
    return PhysicalParams(m=1.0, c=1.0, beta=1.0, v0=0.5, sigma=0.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
