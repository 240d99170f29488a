import pytest

from qexch.codes import builtin_code
from qexch.errors import make_error_set


@pytest.fixture(scope="session")
def exch9():
    return builtin_code("exch9")


@pytest.fixture(scope="session")
def shor9():
    return builtin_code("shor9")


@pytest.fixture(scope="session")
def full9():
    return make_error_set(9, "pauli,exchange")


# criterion number -> (status, title), filled by test_acceptance
ACCEPTANCE: dict[int, tuple[str, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        status, title = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {title}")
