import numpy as np
import pytest

from accelfield.grid import derivative_matrix, make_grid


@pytest.fixture
def grid16():
    return make_grid(16, 0.5)


@pytest.fixture
def stencil16(grid16):
    return derivative_matrix(grid16, 2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
