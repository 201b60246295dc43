import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_RESULTS_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_RESULTS_KEY] = []


@pytest.fixture
def record(request):
    """``record(criterion, ok, detail)`` logs an acceptance verdict for the end-of-run summary."""
    store = request.config.stash[_RESULTS_KEY]

    def _record(criterion, ok, detail=""):
        store.append((criterion, bool(ok), detail))
        return ok

    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(_RESULTS_KEY, [])
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    merged = {}
    for crit, ok, detail in results:
        prev = merged.get(crit, (True, []))
        merged[crit] = (prev[0] and ok, prev[1] + ([detail] if detail else []))
    for crit in sorted(merged, key=lambda c: (int(c.split()[0]) if c.split()[0].isdigit() else 99, c)):
        ok, details = merged[crit]
        terminalreporter.write_line(f"criterion {crit}: {'PASS' if ok else 'FAIL'}  {'; '.join(details)}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
