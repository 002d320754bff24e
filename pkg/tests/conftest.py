import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from spinelab import gallery
from spinelab.lattices import lattice


@pytest.fixture(scope="session")
def z1():
    return lattice(1)


@pytest.fixture(scope="session")
def z2():
    return lattice(2)


@pytest.fixture(scope="session")
def z3():
    return lattice(3)


@pytest.fixture(scope="session")
def half_planes_graph():
    return gallery.build("half-planes")


@pytest.fixture(scope="session")
def z3_tail_graph():
    return gallery.build("z3-tail")


@pytest.fixture(scope="session")
def cross_graph():
    return gallery.build("cross")
