"""Per-criterion verdict reporting for the acceptance suite.

Tests tagged ``@pytest.mark.acceptance(num, label)`` get one summary
line each, printed after the normal pytest output, so a reviewer can
check off the numbered criteria without reading test internals.
"""

_LABELS: dict[int, str] = {}
_NODES: dict[str, int] = {}
_VERDICTS: dict[int, str] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "acceptance(num, label): tie a test to a numbered acceptance criterion",
    )


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("acceptance")
        if marker is None:
            continue
        num, label = marker.args
        _LABELS[num] = label
        _NODES[item.nodeid] = num


def pytest_runtest_logreport(report):
    num = _NODES.get(report.nodeid)
    if num is None:
        return
    if report.failed:
        _VERDICTS[num] = "FAIL"
    elif report.skipped:
        _VERDICTS.setdefault(num, "FAIL")
    elif report.when == "call" and report.passed:
        _VERDICTS.setdefault(num, "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _NODES:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_LABELS):
        verdict = _VERDICTS.get(num, "FAIL")
        terminalreporter.write_line(f"ACCEPTANCE {num:02d}: {verdict} - {_LABELS[num]}")
