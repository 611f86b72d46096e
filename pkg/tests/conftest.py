import numpy as np
import pytest

from loxokit.mobius import flat_structure


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def flat2():
    return flat_structure(2)
