import pytest

_criteria: dict[int, tuple[str, bool]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): an acceptance criterion")


@pytest.hookimpl(wrapper=True)
def pytest_runtest_makereport(item, call):
    report = yield
    mark = item.get_closest_marker("criterion")
    if mark is not None and report.when == "call":
        number, title = mark.args
        passed = report.passed
        if number in _criteria:
            passed = passed and _criteria[number][1]
        _criteria[number] = (title, passed)
    return report


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, passed = _criteria[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {title}")
