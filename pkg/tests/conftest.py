"""Shared fixtures plus the acceptance-summary reporting hook."""

import pytest

from schwsurf import SchwarzschildModel

# filled by tests/test_acceptance.py; printed by the terminal-summary hook
ACCEPTANCE_RESULTS = []


def record_criterion(number: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_RESULTS.append((number, ok, detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(ACCEPTANCE_RESULTS):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[criterion {number:02d}] {status}  {detail}")


@pytest.fixture(scope="session")
def m1():
    return SchwarzschildModel(1.0)


@pytest.fixture(scope="session")
def m2():
    return SchwarzschildModel(2.0)


@pytest.fixture(scope="session")
def flat():
    return SchwarzschildModel(0.0)
