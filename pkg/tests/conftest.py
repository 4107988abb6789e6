import pathlib

import pytest

from rblam.lattice import NAT, TRIPLE
from rblam.typecheck import DeltaProfile

DATA = pathlib.Path(__file__).parent / "data"


@pytest.fixture
def nat():
    return NAT


@pytest.fixture
def triple():
    return TRIPLE


@pytest.fixture
def nat_deltas():
    return DeltaProfile.default(NAT)


@pytest.fixture
def data_dir():
    return DATA
