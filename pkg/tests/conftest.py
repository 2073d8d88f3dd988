import pytest

ACCEPTANCE_LINES = {}


@pytest.fixture
def record_criterion():
    def record(result):
        ACCEPTANCE_LINES[result.number] = result.line()
        print(result.line())

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
