import sys


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is None or not acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(acceptance.RESULTS):
        ok, detail = acceptance.RESULTS[n]
        terminalreporter.write_line(acceptance.format_line(n, ok, detail))
