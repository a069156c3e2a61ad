"""Shared pytest hooks.

Acceptance tests record one verdict line per criterion through the
``criterion`` fixture; the lines are printed together at the end of the
session, whatever the capture mode.
"""

import pytest

_VERDICTS: dict = {}


@pytest.fixture
def criterion():
    def record(number: int, passed: bool, detail: str):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        _VERDICTS[number] = line
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_VERDICTS):
        terminalreporter.write_line(_VERDICTS[number])
