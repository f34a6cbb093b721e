import numpy as np
import pytest

from rodfiter.coning import ConingParams, ErrorModel, quat_true, synthesize_batch, synthesize_increments
from rodfiter.fitting import FitConfig, fit_angular_velocity

T_N = 0.08
N = 8


@pytest.fixture(scope="session")
def coning():
    return ConingParams()


@pytest.fixture(scope="session")
def omega_first(coning):
    """Fitted angular velocity for the first coning interval (N=8, n=7)."""
    batch = synthesize_batch(coning, ErrorModel(), 0.0, T_N, N)
    return fit_angular_velocity(batch, FitConfig(N - 1))


@pytest.fixture(scope="session")
def coning_increments(coning):
    """2 s of noise-free 100 Hz increments and the initial true attitude."""
    t_end, inc = synthesize_increments(coning, ErrorModel(), 2.0, 100.0)
    return t_end, inc, quat_true(coning, 0.0)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
