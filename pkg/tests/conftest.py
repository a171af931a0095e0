from __future__ import annotations

import re

_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)")
_results: dict[int, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    n, name = int(m.group(1)), m.group(2)
    failed = report.failed or (report.when == "call" and report.outcome == "skipped")
    prev = _results.get(n, (name, "PASS"))[1]
    if failed or prev == "FAIL":
        _results[n] = (name, "FAIL")
    elif report.when == "call":
        _results[n] = (name, "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_results):
        name, status = _results[n]
        terminalreporter.write_line(f"criterion {n:2d} {name.replace('_', ' ')}: {status}")
