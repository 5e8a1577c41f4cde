import pytest

# name -> (passed, seconds, detail); filled by test_acceptance
ACCEPTANCE_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, (ok, secs, detail) in sorted(ACCEPTANCE_RESULTS.items(), key=lambda kv: int(kv[0].split()[0][2:])):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name} ({secs:.2f}s) {detail}")
