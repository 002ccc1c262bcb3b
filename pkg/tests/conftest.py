import numpy as np
import pytest

from tcm.spectral import Grid


@pytest.fixture(scope="session")
def g16():
    return Grid(16)


@pytest.fixture(scope="session")
def g32():
    return Grid(32)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
