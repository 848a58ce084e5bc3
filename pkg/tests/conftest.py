import zlib

import numpy as np
import pytest

from bosonbench.rng import RngStream

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng(request):
    # one stream per test, keyed on the test name so tests stay independent
    return RngStream(1234, zlib.crc32(request.node.name.encode()))


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def within_se(estimate, target, se, k=3.0):
    return abs(estimate - target) <= k * se


def mc_mean_se(values):
    values = np.asarray(values, dtype=float)
    return values.mean(), values.std(ddof=1) / np.sqrt(len(values))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
