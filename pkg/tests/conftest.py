import pytest

_ACCEPTANCE_LINES: list = []


@pytest.fixture
def verdict_line():
    """Record one PASS/FAIL line for the acceptance summary and print it immediately."""

    def record(number: int, title: str, ok: bool, detail: str):
        line = f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
        _ACCEPTANCE_LINES.append((number, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
