import pytest

_ACCEPTANCE: list[str] = []


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion; printed at session end."""

    def record(number: int, title: str, passed: bool, detail: str = "") -> bool:
        flag = "PASS" if passed else "FAIL"
        _ACCEPTANCE.append(f"[{flag}] criterion {number:>2}: {title}" + (f" | {detail}" if detail else ""))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
