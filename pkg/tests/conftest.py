import pytest

from helpers import t1


@pytest.fixture
def T1():
    return t1()
