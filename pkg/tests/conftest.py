import numpy as np
import pytest

from inekf.filter import BiasState, EstimatorState
from inekf.liegroup import random_sek3


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_spd(rng, n, scale=1e-2):
    A = rng.normal(size=(n, n))
    return scale * (A @ A.T / n + 0.1 * np.eye(n))


def random_state(rng, k=2, bias=False, scale=1e-2, slots=None):
    X = random_sek3(rng, k=k)
    n = X.dim + (6 if bias else 0)
    theta = BiasState(rng.normal(size=3) * 0.01, rng.normal(size=3) * 0.1) if bias else None
    slots = tuple(range(k - 2)) if slots is None else slots
    return EstimatorState(X, random_spd(rng, n, scale), theta=theta, slots=slots)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line[1])
