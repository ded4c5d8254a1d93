"""Shared pytest glue.

The acceptance module records one line per criterion in
``test_acceptance.RESULTS``; this hook replays those lines in the terminal
summary so the pass/fail verdicts are visible even when stdout capture is on.
"""


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in RESULTS:
        terminalreporter.write_line(line)
