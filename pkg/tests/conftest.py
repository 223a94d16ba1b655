from pathlib import Path

import pytest

from adaptive_cutsel.classes import FamilyParams
from adaptive_cutsel.family import make_instance
from adaptive_cutsel.util import load_instance

FIXTURES = Path(__file__).resolve().parent / "fixtures"


@pytest.fixture
def knapsack_path():
    return str(FIXTURES / "knapsack.json")


@pytest.fixture
def knapsack_fixture(knapsack_path):
    # min -x1 - x2 s.t. 2 x1 + 2 x2 <= 3, x integer in [0, 3]
    return load_instance(knapsack_path)


@pytest.fixture
def family_fixture():
    return make_instance(FamilyParams(1.0, 0.5))
