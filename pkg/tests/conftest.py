import pytest

CRITERIA = {
    1: "oracle equivalence suites",
    2: "algorithmic property suites",
    3: "desk-scale end-to-end IoU and runtime",
    4: "reference dataset run and method ordering",
    5: "determinism",
    6: "gray vs colour comparison harness",
}

_results = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion the test checks")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        details = [v for k, v in item.user_properties if k == "detail"]
        _results.setdefault(marker.args[0], []).append((item.name, report.outcome, details))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n, title in CRITERIA.items():
        runs = _results.get(n, [])
        outcomes = {o for _, o, _ in runs}
        if not runs:
            status = "NOT RUN"
        elif "failed" in outcomes:
            status = "FAIL"
        elif outcomes == {"skipped"}:
            status = "SKIP"
        else:
            status = "PASS"
        notes = "; ".join(d for _, o, ds in runs for d in ds)
        skipped = [name for name, o, _ in runs if o == "skipped"]
        if skipped and status != "SKIP":
            notes += ("; " if notes else "") + "skipped: " + ", ".join(skipped)
        tr.write_line(f"criterion {n} {status:<4} {title}" + (f" ({notes})" if notes else ""))
