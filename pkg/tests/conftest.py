import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_verdicts: dict[int, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    crit = props.get("criterion")
    if crit is None or report.when not in ("setup", "call"):
        return
    if report.when == "setup" and report.passed:
        return
    verdict = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
    _verdicts[crit] = f"criterion {crit:>2}: {verdict}  {props.get('detail', '')}".rstrip()


def pytest_terminal_summary(terminalreporter):
    if not _verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(_verdicts):
        terminalreporter.write_line(_verdicts[crit])


@pytest.fixture
def verdict(request, record_property):
    """Tag the test with its criterion number; call the result to attach a detail line."""
    marker = request.node.get_closest_marker("criterion")
    record_property("criterion", marker.args[0])

    def detail(text: str) -> None:
        record_property("detail", text)
        print(f"criterion {marker.args[0]}: {text}")

    return detail
