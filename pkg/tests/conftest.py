import numpy as np
import pytest

from nmsse import BathSpec, IntegratorConfig, excited, ground
from nmsse.qcore import superposition


@pytest.fixture
def resonant():
    return BathSpec.single_mode(1.0)


@pytest.fixture
def cfg_short():
    # coarse output grid keeps unit tests fast
    return IntegratorConfig(dt=1e-3, horizon=1.5, stride=50)


@pytest.fixture
def plus():
    return superposition(1 / np.sqrt(2), 1 / np.sqrt(2))


@pytest.fixture
def e_state():
    return excited()


@pytest.fixture
def b_state():
    return ground()
