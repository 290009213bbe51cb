import sys
import time

_START = time.perf_counter()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(lines):
        terminalreporter.write_line(lines[n])
    elapsed = time.perf_counter() - _START
    terminalreporter.write_line(f"session wall time {elapsed:.1f} s (budget 60 s)")
