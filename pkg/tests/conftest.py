import math

import pytest

from adaptalloc.models import ResponseModel


@pytest.fixture
def table1_arms():
    return (ResponseModel.normal(0.8, 1.0), ResponseModel.normal(0.2, math.sqrt(0.7)))


@pytest.fixture
def sure_thing():
    """Arm 0 always succeeds, arm 1 always fails."""
    return (ResponseModel.bernoulli(1.0), ResponseModel.bernoulli(0.0))


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line per acceptance criterion, then assert it."""

    def record(label: str, ok: bool, detail: str) -> None:
        ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}")
        assert ok, f"{label}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
