import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from mbcoffset.plant import RotorModel

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

OMEGA_R = 1.27

_ACC = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_ACC] = {}


@pytest.fixture
def acceptance(request):
    """Record one acceptance outcome, print it, then assert it."""
    log = request.config.stash[_ACC]

    def record(num: int, ok: bool, detail: str):
        ok = bool(ok)
        prev = log.get(num)
        log[num] = (ok if prev is None else prev[0] and ok,
                    detail if prev is None else prev[1] + " | " + detail)
        print(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = config.stash.get(_ACC, {})
    if not log:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for num in sorted(log):
        ok, detail = log[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def decoupled():
    return RotorModel.first_order(1.0, 0.1)


@pytest.fixture
def coupled():
    return RotorModel.first_order(1.0, 0.1, 0.1, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
