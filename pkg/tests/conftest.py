"""Shared pytest plumbing: the acceptance tests append one line per
criterion to ACCEPTANCE_LINES and we replay them after the run so the
pass/fail ledger is visible even under output capture."""

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
