import numpy as np
import pytest

from ahcurv import make_hyperbolic_exterior, make_toric_collar


@pytest.fixture(scope="session")
def hyp3():
    """Workhorse geometry: n=3 hyperbolic exterior, t0=1, T=10, 512 nodes."""
    return make_hyperbolic_exterior(3, 1.0, 10.0, 512)


@pytest.fixture(scope="session")
def hyp3_long():
    return make_hyperbolic_exterior(3, 1.0, 12.0, 512)


@pytest.fixture(scope="session")
def toric3():
    return make_toric_collar(3, 1.0, 12.0, 512)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240811)
