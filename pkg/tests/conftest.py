"""Shared test plumbing.

The acceptance tests report one PASS/FAIL line per criterion; collecting
them here and emitting a terminal-summary section keeps the scorecard
visible in plain ``pytest`` runs, where in-test writes are captured.
"""

ACCEPTANCE_LINES: list[str] = []


def record_acceptance(line: str) -> None:
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.write_sep("-", "acceptance scorecard")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
