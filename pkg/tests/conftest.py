import pytest

_RESULTS = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, label): acceptance criterion check")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        measured = dict(item.user_properties).get("measured", "")
        _RESULTS.append((marker.args[0], marker.args[1], rep.passed, measured))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number, label, passed, measured in sorted(_RESULTS, key=lambda r: r[0]):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {label}"
        if measured:
            line += f"  [{measured}]"
        terminalreporter.write_line(line)
