import pytest

# criterion number -> (passed, detail), filled in by tests marked with @pytest.mark.criterion
_RESULTS = {}
_DETAILS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number n")


@pytest.fixture
def report(request):
    """Attach a one-line measurement summary to the current criterion."""
    marker = request.node.get_closest_marker("criterion")

    def _report(detail: str):
        _DETAILS[marker.args[0]] = detail
        print(f"criterion {marker.args[0]}: {detail}")
    return _report


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    num = marker.args[0]
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _RESULTS[num] = rep.passed


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_RESULTS):
        status = "PASS" if _RESULTS[num] else "FAIL"
        detail = _DETAILS.get(num, "")
        terminalreporter.write_line(f"criterion {num}: {status}  {detail}".rstrip())
