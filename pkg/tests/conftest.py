"""Collects acceptance outcomes and prints one line per criterion at the end of the run."""
import pytest

_ACCEPTANCE = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    label = marker.args[0]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
        detail = dict(item.user_properties).get("measured", "")
        _ACCEPTANCE[label] = (report.outcome, doc, detail)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion this test decides")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_ACCEPTANCE, key=lambda s: (int(s.rstrip("ab")), s)):
        outcome, doc, detail = _ACCEPTANCE[label]
        status = "PASS" if outcome == "passed" else "FAIL"
        line = f"[{status}] criterion {label:>3}: {doc}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)
