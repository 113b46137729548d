import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from infinitesimal.grid import Grid, GridDistribution

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# filled by tests/test_acceptance.py, printed at the end of the session
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture
def small_grid():
    return Grid(-25.0, 25.0, 0.01)


def bump_mixture(grid, centers, variances, weights, shift=0.0):
    x = grid.points - shift
    v = np.zeros_like(x)
    for c, s2, w in zip(centers, variances, weights):
        v += w * np.exp(-((x - c) ** 2) / (2 * s2)) / np.sqrt(2 * np.pi * s2)
    return GridDistribution(grid, v)
