import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from ldg_orlicz.dgspace import DGSpace  # noqa: E402
from ldg_orlicz.mesh import build_cartesian, refine_regular  # noqa: E402


@pytest.fixture(scope="session")
def mesh0():
    return build_cartesian()


@pytest.fixture(scope="session")
def mesh1(mesh0):
    return refine_regular(mesh0)


@pytest.fixture(scope="session")
def space1(mesh1):
    return DGSpace(mesh1, 1)


@pytest.fixture(scope="session")
def space2(mesh0):
    return DGSpace(mesh0, 2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
