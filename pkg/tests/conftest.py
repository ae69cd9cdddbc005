import numpy as np
import pytest

from oldroydb import build_uniform_mesh, build_ratio_graded_mesh


@pytest.fixture
def unit_mesh4():
    return build_uniform_mesh(4)


@pytest.fixture
def graded_mesh10():
    return build_ratio_graded_mesh(10, gamma=0.8)


@pytest.fixture
def rng():
    return np.random.default_rng(20260823)
