import pytest

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance():
    """Recorder for one pass/fail line per acceptance criterion."""

    def record(label: str, passed: bool, detail: str, seconds: float, budget: float) -> bool:
        ok = passed and seconds < budget
        line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail} ({seconds:.1f} s, budget {budget:.0f} s)"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
