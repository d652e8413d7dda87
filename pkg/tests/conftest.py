import random

import pytest

from algext.linalg import GF, QQ

from helpers import THEORIES


@pytest.fixture(params=[QQ, GF(5)], ids=["Q", "F5"])
def field(request):
    return request.param


@pytest.fixture
def rng():
    return random.Random(20261016)


@pytest.fixture
def theories():
    return THEORIES
