import numpy as np
import pytest

from memhr.grid import Grid
from memhr.model import ModelParameters

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def typical():
    return ModelParameters.typical()


@pytest.fixture
def unit_grid():
    return Grid((1.0,), (64,))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
