import warnings

import numpy as np
import pytest

from phasecone.errors import DecayWarning
from phasecone.experiments import corpus
from phasecone.phase import PhaseGrid
from phasecone.transforms import dequantize

N = 64


@pytest.fixture(scope="session")
def grid():
    return PhaseGrid(10.0, 128)


@pytest.fixture(scope="session")
def small_grid():
    return PhaseGrid(10.0, 64)


@pytest.fixture(scope="session")
def states():
    return corpus(N)


@pytest.fixture(scope="session")
def chars(states, grid):
    """Dequantized corpus on the default grid (the cat state has not fully decayed at L=10)."""
    out = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DecayWarning)
        for name, rho in states.items():
            out[name] = dequantize(rho, grid)
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
