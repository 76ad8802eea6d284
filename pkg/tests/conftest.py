import sys
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

from autogrp.files import load_hom, load_structure  # noqa: E402
from autogrp.groups import FreeAbelianGroup, FreeGroup  # noqa: E402
from autogrp.structures import shortlex_structure  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def F2():
    return FreeGroup(2)


@pytest.fixture(scope="session")
def Z():
    return FreeAbelianGroup(1)


@pytest.fixture(scope="session")
def ZZ():
    return FreeAbelianGroup(2)


@pytest.fixture(scope="session")
def f2_shortlex(F2):
    return shortlex_structure(F2)


@pytest.fixture
def gallery():
    """Fresh structures and maps from the bundled definition files."""
    class G:
        structure = staticmethod(load_structure)
        hom = staticmethod(load_hom)
    return G


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1][1:])):
            terminalreporter.write_line(line)
