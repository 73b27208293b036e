import numpy as np
import pytest

from coevo.model import ModelParams
from coevo.networks import complete_network


@pytest.fixture
def complete4():
    return complete_network(4)


@pytest.fixture
def params_r2():
    """n=4, r=2, uniform thirds: the defection-uniqueness regime."""
    return ModelParams.uniform(4, 2.0, 1 / 3, 1 / 3, 1 / 3)


@pytest.fixture
def params_r38():
    """n=4, r=3.8, uniform thirds: the cooperation-existence regime."""
    return ModelParams.uniform(4, 3.8, 1 / 3, 1 / 3, 1 / 3)


@pytest.fixture
def rng():
    return np.random.default_rng(20260817)
