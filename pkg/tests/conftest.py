import numpy as np
import pytest

from symstokes.discretization import StokesOperator
from symstokes.scenarios import cavity


def cavity_op(resolution, gamma=1e-3, eta=1e-3, h=None):
    grid, bc = cavity(resolution, h)
    return StokesOperator(grid, None, eta, gamma), bc


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def acceptance_log(request):
    log = []
    request.config._acceptance_log = log
    return log


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = getattr(config, "_acceptance_log", None)
    if not log:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(log, key=lambda item: item[0]):
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
