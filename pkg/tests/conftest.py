from fractions import Fraction

import pytest

from treedyn.catalog import build_catalog
from treedyn.plmap import PLMap
from treedyn.tree import FiniteTree

F = Fraction


def unit_interval():
    return FiniteTree(["v0", "v1"], [("e0", "v0", "v1", 1)])


def star(k=3):
    return FiniteTree(["c"] + [f"l{i}" for i in range(1, k + 1)],
                      [(f"a{i}", "c", f"l{i}", 1) for i in range(1, k + 1)])


def at(tree, x):
    """Point of the unit interval (edge e0) at offset x."""
    return tree.point("e0", F(x))


@pytest.fixture
def interval():
    return unit_interval()


@pytest.fixture
def star3():
    return star(3)


@pytest.fixture
def tent():
    return build_catalog("tent")


@pytest.fixture
def half():
    return build_catalog("interval_scaling", {"alpha": F(1, 2)})


@pytest.fixture
def ident():
    t = unit_interval()
    return t, PLMap.identity(t)


@pytest.fixture
def rotation():
    return build_catalog("star_rotation", {"k": 3})


@pytest.fixture
def clamped():
    return build_catalog("interval_clamped_scaling", {"alpha": F(2)})


# one line per acceptance criterion, printed after the test session
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
