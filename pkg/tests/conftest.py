import warnings

import pytest

from heptaca.rules import paper_table
from heptaca.structures import AmbiguousLayout

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): one acceptance criterion")


@pytest.fixture(scope="session")
def table():
    return paper_table()


@pytest.fixture(autouse=True)
def _quiet_layout_warnings():
    # completion ambiguity is reported on purpose; tests that care use pytest.warns
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AmbiguousLayout)
        yield


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    marker = getattr(report, "acceptance", None)
    if marker is not None:
        _RESULTS[marker[0]] = (marker[1], report.outcome, report.longreprtext.strip().splitlines())


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    m = item.get_closest_marker("acceptance")
    if m is not None:
        report.acceptance = m.args


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_RESULTS):
        title, outcome, lines = _RESULTS[number]
        status = "PASS" if outcome == "passed" else "FAIL"
        reason = ""
        if status == "FAIL":
            errs = [ln for ln in lines if ln.startswith("E ")]
            reason = f"  ({errs[0][1:].strip()})" if errs else ""
        tr.write_line(f"criterion {number}: {status}  {title}{reason}")
