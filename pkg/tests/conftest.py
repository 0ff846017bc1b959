from _acceptance_log import LINES


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Echo the acceptance verdicts in the run summary, pass or fail."""
    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
