import pytest

from drwsim.fdfd import solve_modes
from drwsim.model import reference_cross_section

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def cs():
    return reference_cross_section()


@pytest.fixture(scope="session")
def modes_110(cs):
    return solve_modes(cs, 110e9, 4)


@pytest.fixture(scope="session")
def modes_100(cs):
    return solve_modes(cs, 100e9, 1)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
