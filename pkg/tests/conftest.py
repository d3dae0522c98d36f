"""Collects acceptance outcomes and prints one line per criterion at the end."""

import pytest

_outcomes: dict[str, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        number, title = marker.args
        details = [v for k, v in item.user_properties if k == "detail"]
        status = "PASS" if report.passed else "SKIP" if report.skipped else "FAIL"
        _outcomes.setdefault(str(number), []).append((title, status, "; ".join(details)))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_outcomes, key=lambda n: (int("".join(c for c in n if c.isdigit())), n)):
        for title, status, detail in _outcomes[number]:
            line = f"[{status}] criterion {number}: {title}"
            if detail:
                line += f" ({detail})"
            terminalreporter.write_line(line)
