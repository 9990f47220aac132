"""Acceptance reporting: one PASS/FAIL line per criterion after the run.

Tests opt in with ``@pytest.mark.acceptance(number, title)``; a criterion
passes when every test carrying its number passed. The ``note`` fixture adds
measured values to the criterion's line.
"""
import pytest

_STATUS = {}
_NOTES = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion checked by this test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    number, title = mark.args
    entry = _STATUS.setdefault(number, {"title": title, "failed": False, "passed": 0})
    if rep.failed:
        entry["failed"] = True
    elif rep.when == "call" and rep.passed:
        entry["passed"] += 1


@pytest.fixture
def note(request):
    mark = request.node.get_closest_marker("acceptance")
    number = mark.args[0] if mark else None

    def add(text: str):
        _NOTES.setdefault(number, []).append(text)

    return add


def pytest_terminal_summary(terminalreporter):
    if not _STATUS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_STATUS):
        entry = _STATUS[number]
        verdict = "FAIL" if entry["failed"] or not entry["passed"] else "PASS"
        tr.write_line(f"criterion {number:2d}: {verdict}  {entry['title']}")
        for text in _NOTES.get(number, []):
            tr.write_line(f"              {text}")
