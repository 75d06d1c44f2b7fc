from pathlib import Path

import numpy as np
import pytest

DATA = Path(__file__).parent / "data"

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def record_criterion():
    """Log one PASS/FAIL line for an acceptance criterion, then assert it."""

    def record(number, title, passed, detail=""):
        status = "PASS" if passed else "FAIL"
        ACCEPTANCE_LINES.append(f"[{status}] criterion {number:>2}: {title}  ({detail})")
        assert passed, f"criterion {number} ({title}) not met: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
