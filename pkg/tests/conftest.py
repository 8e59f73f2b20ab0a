import time

import numpy as np
import pytest

from gasnet.components import PipeParams
from gasnet.model import GasProperties

SUITE_BUDGET_S = 60.0
N_CRITERIA = 10

_outcomes: dict[int, list[bool]] = {}
_start = [time.perf_counter()]


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion exercised by the test")
    _start[0] = time.perf_counter()


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    for marker in getattr(report, "criteria", ()):
        _outcomes.setdefault(marker, []).append(report.outcome == "passed")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    report.criteria = tuple(m.args[0] for m in item.iter_markers("criterion"))


def _suite_elapsed():
    return time.perf_counter() - _start[0]


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    elapsed = _suite_elapsed()
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in range(1, N_CRITERIA + 1):
        results = _outcomes.get(n)
        if n == N_CRITERIA and results is not None:
            results = results + [elapsed < SUITE_BUDGET_S]
        if not results:
            tr.write_line(f"criterion {n:2d}: NOT RUN")
            continue
        word = "PASS" if all(results) else "FAIL"
        extra = f" (suite wall time {elapsed:.1f} s)" if n == N_CRITERIA else ""
        tr.write_line(f"criterion {n:2d}: {word}  [{sum(results)}/{len(results)} checks]{extra}")


def pytest_sessionfinish(session, exitstatus):
    if _outcomes.get(N_CRITERIA) and _suite_elapsed() >= SUITE_BUDGET_S and exitstatus == 0:
        session.exitstatus = 1


@pytest.fixture
def gas():
    return GasProperties(R_s=500.0, T_0=300.0, z_0=0.9, c_p=1750.0, c_v=1250.0, g=9.81)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def make_pipe(gas, q=10.0, p_left=5e6, D=0.4, X=1000.0, lam=0.01, h=0.0):
    return PipeParams.from_diameter(D, X, lam, gas, p_left, q, h=h)


def random_pipe(rng, gas, q=None):
    """Pipe with geometry and operating point drawn from a physically sensible box."""
    return PipeParams.from_diameter(
        D=rng.uniform(0.1, 1.2),
        X=rng.uniform(100.0, 2e4),
        lam=rng.uniform(0.005, 0.03),
        gas=gas,
        nominal_p_left=rng.uniform(1e6, 8e6),
        nominal_q=rng.uniform(-60.0, 60.0) if q is None else q,
        h=rng.uniform(-50.0, 50.0),
    )
