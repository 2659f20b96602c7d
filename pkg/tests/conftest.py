import os
import time
from contextlib import contextmanager

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", deadline=None, max_examples=500)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_ACCEPTANCE = pytest.StashKey[dict]()


class CriterionRecorder:
    """Collects one verdict line per acceptance criterion."""

    def __init__(self, store: dict):
        self.store = store

    @contextmanager
    def __call__(self, number: int, title: str):
        start = time.perf_counter()
        try:
            yield
        except BaseException:
            self.store[number] = ("FAIL", title, time.perf_counter() - start)
            raise
        self.store[number] = ("PASS", title, time.perf_counter() - start)


@pytest.fixture
def criterion(request):
    return CriterionRecorder(request.config.stash.setdefault(_ACCEPTANCE, {}))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(_ACCEPTANCE, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        verdict, title, elapsed = results[number]
        terminalreporter.write_line(f"criterion {number:2d}: {verdict}  {title}  ({elapsed:.2f} s)")
