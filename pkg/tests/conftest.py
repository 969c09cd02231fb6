import sys


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance-criterion pass/fail lines past output capture."""
    mod = sys.modules.get("tests.test_acceptance") or sys.modules.get("test_acceptance")
    lines = getattr(mod, "REPORT_LINES", None) if mod else None
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.line(line)
