import os

import pytest
from rankguard.polar import PolarCode

DATA_DIR = os.path.join(os.path.dirname(__file__), "__data__")


@pytest.fixture
def data_dir():
    return DATA_DIR


@pytest.fixture
def toy():
    # N = 2 with x = (u_1 + u_2, u_2); u_1 is the frozen mask.
    return PolarCode.from_sets(1, [2])


@pytest.fixture
def code_a4():
    return PolarCode.from_sets(2, [4])


@pytest.fixture
def code_a234():
    return PolarCode.from_sets(2, [2, 3, 4])
