import pytest

from lrs.rng import SeededRng
from models.schemas import FieldParams


@pytest.fixture
def rng():
    return SeededRng(20240611, "tests")


@pytest.fixture
def p11n2():
    return FieldParams(p=11, n=2)


@pytest.fixture
def p5n1():
    return FieldParams(p=5, n=1)
