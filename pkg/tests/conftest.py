import random

import pytest
from hypothesis import HealthCheck, settings

from treecascade.catalog import CatalogTree
from treecascade.keys import Key
from treecascade.trace import random_tree

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("default")

ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)


# root r=0 <- a=1 <- b=2
R, A, B_ = 0, 1, 2
PATH3 = [-1, 0, 1]


def keyed(vals, start):
    return [Key(v, start + i) for i, v in enumerate(vals)]


@pytest.fixture
def three_node():
    """C(r)={10,30}, C(a)={20}, C(b)={5,25}."""
    cats = {R: keyed([10, 30], 0), A: keyed([20], 10), B_: keyed([5, 25], 20)}
    return CatalogTree(PATH3, cats)


@pytest.fixture
def rng():
    return random.Random(12345)


def random_shape(rng, n, degree=8):
    return random_tree(rng, n, degree)
