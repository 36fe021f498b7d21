"""Collects acceptance-criterion outcomes and prints one line per criterion."""

import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(cid, title): acceptance criterion")


@pytest.fixture
def report(request):
    """Attach a measured-value summary to the current criterion."""
    notes = []
    request.node.user_properties.append(("notes", notes))
    return notes.append


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call":
        return
    cid, title = mark.args
    notes = next((v for k, v in item.user_properties if k == "notes"), [])
    _RESULTS[cid] = (rep.passed, title, "; ".join(notes))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid in sorted(_RESULTS, key=lambda c: int(c[1:])):
        ok, title, notes = _RESULTS[cid]
        tr.write_line(f"{cid:<4}{'PASS' if ok else 'FAIL'}  {title}" + (f"  [{notes}]" if notes else ""))
    npass = sum(ok for ok, _, _ in _RESULTS.values())
    tr.write_line(f"{npass}/{len(_RESULTS)} criteria pass")
