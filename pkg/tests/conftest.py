import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from relhartree.spectral import PHYSICAL, Field, make_grid

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def random_field(grid, rng, smooth=None):
    """Complex white noise, optionally low-passed with a Gaussian of width ``smooth`` in xi."""
    vals = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
    f = Field(grid, vals, PHYSICAL)
    if smooth is None:
        return f
    spec = f.spectral()
    return Field(grid, spec.values * np.exp(-grid.k2 / (2 * smooth**2)), spec.space).physical()


def gaussian(grid, amp=1.0, width=1.0):
    return Field.from_function(grid, lambda a, b: amp * np.exp(-(a * a + b * b) / (2 * width * width)))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def grid64():
    return make_grid(64, 32.0)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


def report_criterion(number: int, passed: bool, text: str) -> None:
    ACCEPTANCE_LINES[number] = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {text}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
