from __future__ import annotations

import re
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # factories / stubs importable as modules

from factories import write_png  # noqa: E402
from mathvr.sandbox.pool import ExecResult, RunnerPool  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(name): criterion of the acceptance gate")


@pytest.fixture(scope="session")
def runner_pool():
    """One shared live runner pool; pool self-heals across destructive tests."""
    pool = RunnerPool(workers=2)
    yield pool
    pool.close()


class StubSandbox:
    """Deterministic in-process stand-in for the runner pool.

    Code directives drive the outcome: ``RAISE`` fails, ``FIGS=<n>`` renders
    n tiny PNGs (default 1). Counts every call for termination-bound checks.
    """

    def __init__(self, always_fail: bool = False):
        self.calls = 0
        self.always_fail = always_fail

    def execute(self, req) -> ExecResult:
        self.calls += 1
        req.figure_dir.mkdir(parents=True, exist_ok=True)
        if self.always_fail or "RAISE" in req.code:
            return ExecResult(status="error", stderr="RuntimeError: scripted failure", duration=0.0)
        match = re.search(r"FIGS=(\d+)", req.code)
        n = int(match.group(1)) if match else 1
        figures = []
        for i in range(n):
            path = req.figure_dir / f"figure_{i:02d}.png"
            write_png(path)
            figures.append(str(path))
        return ExecResult(status="ok", figures=figures, stdout="", stderr="", duration=0.0)


@pytest.fixture
def stub_sandbox():
    return StubSandbox()


_ACCEPTANCE_RESULTS: dict[str, list[tuple[str, str]]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call":
        return
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    name = marker.args[0] if marker.args else item.name
    outcome_name = "xfail" if hasattr(report, "wasxfail") else report.outcome
    _ACCEPTANCE_RESULTS.setdefault(name, []).append((item.nodeid, outcome_name))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE_RESULTS):
        outcomes = [o for _, o in _ACCEPTANCE_RESULTS[name]]
        ok = all(o in ("passed", "xfail") for o in outcomes)
        status = "PASS" if ok else "FAIL"
        n_xfail = sum(1 for o in outcomes if o == "xfail")
        note = f", {n_xfail} expected-fail" if n_xfail else ""
        terminalreporter.write_line(f"[{status}] {name} ({len(outcomes)} tests{note})")
