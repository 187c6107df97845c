from fractions import Fraction

import pytest

from wmdim import IePair, SystemSpec

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def shift4():
    return SystemSpec.full_shift(("0", "1"), 4)


@pytest.fixture
def shift6():
    return SystemSpec.full_shift(("0", "1"), 6)


@pytest.fixture
def golden():
    return SystemSpec.sft(("0", "1"), ["11"], 8)


@pytest.fixture
def circle():
    return SystemSpec.circle(2, 8)


@pytest.fixture
def pair01():
    return IePair(("0",), ("1",))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


F = Fraction
