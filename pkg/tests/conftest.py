import numpy as np
import pytest

from stabvkoga.greedy import GreedyState

ACCEPTANCE_RESULTS = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_state(power, residual_norms, selected=()):
    """Hand-built state with prescribed power values and scalar residuals."""
    power = np.asarray(power, dtype=float)
    res = np.asarray(residual_norms, dtype=float)[:, None]
    X = np.arange(power.size, dtype=float)[:, None]
    return GreedyState(X=X, Y=res.copy(), selected=list(selected), power_sq=power**2, residual=res)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(line)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep
