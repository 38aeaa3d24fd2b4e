import math

import pytest

from clusterbounds.model import Model, Volume


@pytest.fixture
def nn_chain():
    """J(0)=2, J(+-1)=0.5, lambda=1 on Z."""
    return Model.nearest_neighbor(1, 2.0, 0.5, 1.0)


@pytest.fixture
def two_sites():
    return Volume.chain(2)


@pytest.fixture
def strong_decay():
    """Model with J(0)/J_neq = e^20; certified for the small-lambda theorems at tiny lambda."""
    return Model.nearest_neighbor(1, 1.0, 0.5 * math.exp(-20), 1e-53)


ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def acceptance():
    """Records one PASS/FAIL line per acceptance criterion (printed in the terminal summary)."""
    def record(number: int, ok: bool, detail: str) -> bool:
        ACCEPTANCE_LINES[number] = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(ACCEPTANCE_LINES[number])
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
