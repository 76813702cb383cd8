import pytest

from hogram.verify import fixture


@pytest.fixture
def g1():
    return fixture("g1")


@pytest.fixture
def g2():
    return fixture("g2")


@pytest.fixture
def g3():
    return fixture("g3")


# One line per acceptance criterion, filled in by test_acceptance.py.
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
