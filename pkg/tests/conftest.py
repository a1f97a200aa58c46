import pytest

_outcomes: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    report = (yield).get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    failed = report.failed or (report.when == "setup" and report.skipped)
    if failed or (report.when == "call" and number not in _outcomes):
        _outcomes[number] = ("FAIL" if failed else "PASS", title)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_outcomes):
        status, title = _outcomes[number]
        terminalreporter.write_line(f"{status} {number:2d} {title}")
