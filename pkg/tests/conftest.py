import pytest

_criteria: dict[int, dict] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or (report.when != "call" and not report.failed):
        return
    number, title = marker.args
    entry = _criteria.setdefault(number, {"title": title, "ok": True, "why": ""})
    if report.failed:
        entry["ok"] = False
        if not entry["why"]:
            entry["why"] = str(call.excinfo.value).splitlines()[0][:120] if call.excinfo else "error"


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        e = _criteria[number]
        line = f"criterion {number:2d} {'PASS' if e['ok'] else 'FAIL'}  {e['title']}"
        if not e["ok"]:
            line += f"  ({e['why']})"
        terminalreporter.write_line(line)
