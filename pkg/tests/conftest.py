import numpy as np
import pytest
from hypothesis import settings

from nsk1d.config import RunConfig
from nsk1d.grid import make_grid

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


def smooth_field(grid, coeffs, mean=0.0):
    """``mean + sum c_k cos(2 pi k x) + s_k sin(2 pi k x)`` from a flat list ``[c1, s1, c2, s2, ...]``."""
    x = grid.x
    out = np.full(grid.n, float(mean))
    for k in range(len(coeffs) // 2):
        arg = 2.0 * np.pi * (k + 1) * x / grid.length
        out += coeffs[2 * k] * np.cos(arg) + coeffs[2 * k + 1] * np.sin(arg)
    return out


def positive_field(grid, coeffs, floor=0.2):
    """Smooth field rescaled to mean 1 and minimum ``floor`` (unless already above it)."""
    p = smooth_field(grid, coeffs)
    low = -p.min()
    if low > 1.0 - floor:
        p = p * (1.0 - floor) / low
    return 1.0 + p


@pytest.fixture
def grid256():
    return make_grid(256)


@pytest.fixture(scope="session")
def reference_trajectory():
    """The reference run (n=256, alpha=1, beta=-1, gamma=2, eps=0.01, t_end=0.05, cfl=0.25)."""
    from nsk1d.solver import run

    return run(RunConfig())


_CRITERIA = {}


@pytest.fixture
def criterion():
    """``criterion(number, summary, passed)`` records one acceptance line; returns ``passed``."""

    def record(number, summary, passed):
        _CRITERIA[number] = (bool(passed), summary)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        passed, summary = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {summary}")
