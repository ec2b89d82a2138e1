import pytest

_results = {}


def pytest_runtest_logreport(report):
    crit = getattr(report, "criterion", None)
    if crit is None:
        return
    # a criterion passes only if every phase of every test carrying it passes
    ok = report.passed or (report.when != "call" and not report.failed)
    if report.skipped and report.when == "call":
        ok = False
    prev = _results.get(crit, True)
    _results[crit] = prev and ok


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        rep.criterion = (marker.args[0], marker.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for (number, name), ok in sorted(_results.items()):
        terminalreporter.write_line(f"criterion {number} {name}: {'PASS' if ok else 'FAIL'}")
