import pytest

_results = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


@pytest.fixture
def detail(request):
    """Attach a one-line summary (measured values) to the acceptance report."""
    def record(text):
        request.node.user_properties.append(("detail", text))
    return record


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    info = [v for k, v in report.user_properties if k == "criterion"]
    if not info:
        return
    number, title = info[0]
    details = [v for k, v in report.user_properties if k == "detail"]
    _results[number] = (title, report.outcome == "passed", "; ".join(details))


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            item.user_properties.append(("criterion", m.args))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        title, ok, text = _results[number]
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}"
        if text:
            line += f"  [{text}]"
        terminalreporter.write_line(line)
