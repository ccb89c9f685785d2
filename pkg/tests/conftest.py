import numpy as np
import pytest

from toposeg import _kernels


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    _kernels.warmup()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
