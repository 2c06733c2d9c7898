import numpy as np
import pytest

from phaselab.beams import GaussianBeamParams, PlaneWaveParams
from phaselab.grid import Grid2D


@pytest.fixture
def unit_grid():
    return Grid2D.square(129)


@pytest.fixture
def small_grid():
    return Grid2D.square(33)


@pytest.fixture
def gaussian():
    return GaussianBeamParams(z_R=1.0, k=1.0)


@pytest.fixture
def plane_wave():
    return PlaneWaveParams((1.0, 1.0), k=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.report_lines():
        terminalreporter.write_line(line)
