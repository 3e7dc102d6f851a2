import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Echo the one-line verdicts collected by the acceptance suite."""
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance checks")
        for line in lines:
            terminalreporter.write_line(line)
