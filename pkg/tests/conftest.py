"""Echo acceptance verdicts after the run. The acceptance tests collect
(name, passed) pairs; printing them from the terminal-summary hook keeps
one visible PASS/FAIL line per criterion whatever the capture mode."""

import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    module = sys.modules.get("tests.test_acceptance") or sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok in results:
        terminalreporter.write_line(f"ACCEPTANCE {name}: {'PASS' if ok else 'FAIL'}")
