import numpy as np
import pytest

from dfssm.tensor import precision


@pytest.fixture()
def rng():
    return np.random.default_rng(0)


@pytest.fixture()
def f64():
    with precision(np.float64):
        yield
