import numpy as np
import pytest

_ACCEPTANCE = []
_SETUP_TIME = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(label): exit criterion of the build")
    config.addinivalue_line("markers", "slow: long-running end-to-end test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "setup":
        _SETUP_TIME[item.nodeid] = report.duration
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        note = getattr(report, "wasxfail", "")
        duration = report.duration + (_SETUP_TIME.get(item.nodeid, 0.0) if report.when == "call" else 0.0)
        _ACCEPTANCE.append((marker.args[0], item.name, report.outcome, duration, note))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, name, outcome, duration, note in _ACCEPTANCE:
        status = "PASS" if outcome == "passed" and not note else "FAIL"
        suffix = f"; known failure: {note}" if note else ""
        terminalreporter.write_line(f"[{status}] {label} ({name}, {duration:.1f}s{suffix})")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
