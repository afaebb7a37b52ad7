import sys
import numpy as np
import pytest
from hypothesis import settings

from fracnls.grid import SpectralField, make_grid

settings.register_profile("default", deadline=None, max_examples=25)
settings.load_profile("default")


def random_field(grid, seed, dealias=True, decay=2.0):
    """Smooth random field: Gaussian coefficients damped like exp(-|xi|^2/decay)."""
    rng = np.random.default_rng(seed)
    c = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
    c = c * np.exp(-grid.xi_abs ** 2 / decay)
    if dealias:
        c = np.where(grid.dealias_mask, c, 0.0)
    return SpectralField(grid, c)


@pytest.fixture
def grid1():
    return make_grid(1, 32, 7.0)


@pytest.fixture
def grid3():
    return make_grid(3, 16, 6.0)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("tests.test_acceptance")
    if mod is None:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
