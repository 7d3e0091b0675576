import pytest

# filled by test_acceptance.py: (criterion, status, detail, seconds)
ACCEPTANCE_LINES: list[tuple[int, str, str, float]] = []


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, status, detail, seconds in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(f"{status} criterion {number}: {detail} ({seconds:.2f}s)")
