import numpy as np
import pytest

from volforms.estimator import RngStream
from volforms.paths import Grid


@pytest.fixture
def grid128():
    return Grid(128)


@pytest.fixture
def grid256():
    return Grid(256)


@pytest.fixture
def stream():
    return RngStream(42, 7)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
