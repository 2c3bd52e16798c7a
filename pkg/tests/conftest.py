import numpy as np
import pytest

from rmfront.front import solve_front
from rmfront.kpp import kpp_front_solve
from rmfront.model import ModelParams
from rmfront.spectrum import weight_interval


@pytest.fixture(scope="session")
def ess_params():
    """Reference parameters of the essential-spectrum examples."""
    return ModelParams(alpha=0.75, eta=3.0, delta=0.1, epsilon=0.01, c=1.0)


@pytest.fixture(scope="session")
def front1_params():
    return ModelParams(alpha=0.5, eta=2.0, delta=0.1, epsilon=0.05, c=1.5)


@pytest.fixture(scope="session")
def front1(front1_params):
    return solve_front(front1_params)


@pytest.fixture(scope="session")
def front_zero(front1_params):
    return solve_front(front1_params.with_(epsilon=0.0))


@pytest.fixture(scope="session")
def ess_front(ess_params):
    return solve_front(ess_params)


@pytest.fixture(scope="session")
def kpp_front(ess_params):
    return kpp_front_solve(ess_params)


@pytest.fixture(scope="session")
def sigma_mid():
    def get(params):
        return weight_interval(params).midpoint

    return get


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_report():
    """Record one PASS/FAIL line per acceptance criterion."""

    def record(number, ok, detail):
        tag = "N/A" if ok is None else ("PASS" if ok else "FAIL")
        line = f"{tag} criterion {number}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
