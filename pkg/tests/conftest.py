"""Shared test plumbing: per-criterion acceptance lines in the summary."""

ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, description: str, passed: bool) -> None:
    ACCEPTANCE_LINES.append(
        f"criterion {number:>2}: {'PASS' if passed else 'FAIL'} - {description}"
    )


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
