import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("thorough", deadline=None, max_examples=500)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_ACCEPTANCE = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def acceptance_note(request):
    """Attach a one-line measurement to the current acceptance criterion."""
    notes = []
    _ACCEPTANCE.setdefault(request.node.name, {})["notes"] = notes
    return notes.append


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    name = report.nodeid.rsplit("::", 1)[1]
    entry = _ACCEPTANCE.setdefault(name, {})
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        entry["outcome"] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE, key=lambda s: int(s.split("_")[2])):
        entry = _ACCEPTANCE[name]
        if "outcome" not in entry:
            continue
        verdict = "PASS" if entry["outcome"] == "passed" else "FAIL"
        num = int(name.split("_")[2])
        detail = "; ".join(entry.get("notes", []))
        terminalreporter.write_line(f"criterion {num:2d}: {verdict}  {name}  {detail}".rstrip())
