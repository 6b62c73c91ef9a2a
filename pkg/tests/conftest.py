import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default", max_examples=40, deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")
    config.addinivalue_line("markers", "invariant: module invariant counted by criterion 9")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def report_detail(request):
    """Attach a one-line measurement to the running acceptance test."""
    def record(text):
        request.node.user_properties.append(("detail", text))
    return record


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    for mark in report.keywords:
        if mark.startswith("criterion_"):
            n = int(mark.split("_")[1])
            detail = "; ".join(v for k, v in report.user_properties if k == "detail")
            _CRITERIA[n] = (report.outcome, detail)


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            item.keywords[f"criterion_{m.args[0]}"] = True


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        outcome, detail = _CRITERIA[n]
        word = "PASS" if outcome == "passed" else "FAIL"
        line = f"criterion {n}: {word}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)
