"""Shared pytest wiring: print the acceptance verdict lines after the run.

The acceptance tests record one verdict line each; stdout capture would hide
them on success, so a terminal-summary hook replays them where they are
always visible (including in piped/teed logs).
"""

from __future__ import annotations


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    try:
        from test_acceptance import VERDICT_LINES
    except ImportError:
        return
    if VERDICT_LINES:
        terminalreporter.write_sep("=", "acceptance report")
        for line in VERDICT_LINES:
            terminalreporter.write_line(line)
