"""Shared test plumbing: collects acceptance-criterion verdict lines and
prints them after the run, outside pytest's output capture."""

acceptance_lines: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)
