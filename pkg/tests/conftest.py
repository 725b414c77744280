import numpy as np
import pytest

from obsdiam import FiniteMMSpace, WeightedCloud

from . import acceptance_log


@pytest.fixture
def two_point():
    return FiniteMMSpace([[0.0, 1.0], [1.0, 0.0]], [0.5, 0.5])


@pytest.fixture
def line4():
    return WeightedCloud.on_line([0.0, 1.0, 2.0, 3.0], [0.25] * 4)


@pytest.fixture
def equilateral():
    return FiniteMMSpace(1.0 - np.eye(3), [1 / 3] * 3)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    if acceptance_log.LINES:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_log.LINES:
            terminalreporter.write_line(line)
