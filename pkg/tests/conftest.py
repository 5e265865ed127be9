import pytest

# criterion number -> (passed, description), filled by the acceptance tests
_results = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "criterion(num, desc): acceptance criterion; outcome is echoed as a "
        "PASS/FAIL line in the terminal summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    num, desc = marker.args
    if report.when == "call":
        prev_ok = _results.get(num, (True, desc))[0]
        _results[num] = (prev_ok and report.passed, desc)
    elif report.failed:  # setup or teardown error also fails the criterion
        _results[num] = (False, desc)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_results):
        ok, desc = _results[num]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {num}: {desc}")
