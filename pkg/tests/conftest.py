import numpy as np
import pytest

from interpineq.lattice import Box, PiecewiseConstantField

ACCEPTANCE: dict[int, tuple[str, str]] = {}


def field_1d(values, lower=0, side=1):
    values = np.asarray(values, dtype=float)
    level = int(np.log2(values.size))
    return PiecewiseConstantField(level, Box(1, (lower,), side), values)


@pytest.fixture
def half_indicator():
    """chi_[0,1/2) on [0,1)."""
    return field_1d([1.0, 0.0])


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or (call.when != "call" and call.excinfo is None):
        return
    number, title = marker.args
    # a fixture error during setup counts against the criterion too
    outcome = "PASS" if call.excinfo is None else "FAIL"
    ACCEPTANCE[number] = (title, outcome)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")
    config.addinivalue_line("markers", "slow: long-running test")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, outcome = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d} {outcome}: {title}")
