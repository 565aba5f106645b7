import pytest

from chaosctl import Branch, henon, lozi


@pytest.fixture
def henon_std():
    return henon()


@pytest.fixture
def lozi_std():
    return lozi()


@pytest.fixture
def plus():
    return Branch.PLUS
