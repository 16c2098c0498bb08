import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from bbqram import kernels

settings.register_profile("ci", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")

GOLDEN = [[2.2, 3.1, -3.0, 1.2],
          [0.3, 1.0, 0.5, -2.5]]


@pytest.fixture(scope="session", autouse=True)
def _compiled():
    kernels.warmup()


@pytest.fixture
def golden():
    return np.array(GOLDEN)


def random_shape(rng, K):
    k = K.bit_length() - 1
    m = int(rng.integers(0, k + 1))
    return 1 << m, 1 << (k - m)


ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
