import os

import numpy as np
import pytest

from ccpsor.grid import WorldState

ACCEPTANCE_LINES: list[str] = []


def make_world(prey, predators, width=30, height=30):
    return WorldState(width, height, prey, list(predators))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def cross_world():
    # four predators on the side neighbours of a central prey
    return make_world((10, 10), [(9, 10), (11, 10), (10, 9), (10, 11)])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def pytest_report_header(config):
    return f"ccpsor backend: {os.environ.get('CCPSOR_BACKEND', 'numba')}"
