import pytest

# Acceptance tests append "criterion N PASS|FAIL: ..." lines here.
ACCEPTANCE_LINES: list = []


@pytest.fixture
def verdict():
    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number} {'PASS' if ok else 'FAIL'}: {detail}"
        ACCEPTANCE_LINES.append((number, line))
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
