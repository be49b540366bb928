"""Prints the acceptance verdicts at the end of the run, one line per criterion."""

from helpers import ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, line in sorted(ACCEPTANCE_LINES.items()):
        terminalreporter.write_line(line)
