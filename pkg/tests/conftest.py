"""Shared fixtures."""

import pytest

from gendiag import samplers
from oracles import ACCEPTANCE_SEED


@pytest.fixture(scope="session")
def m3_chains():
    return samplers.mh_run(samplers.scenario("m3", seed=ACCEPTANCE_SEED))


@pytest.fixture(scope="session")
def m4_chains():
    return samplers.mh_run(samplers.scenario("m4", seed=ACCEPTANCE_SEED))


ACCEPTANCE_LINES = {}


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion; printed at session end."""

    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
