from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pluralis import make_momdp


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(name): top-level acceptance criterion check"
    )


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Print one line per acceptance criterion so the gate is auditable."""
    lines = []
    for status in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(status, []):
            marker = getattr(report, "acceptance_name", None)
            if marker is not None:
                verdict = "PASS" if status == "passed" else "FAIL"
                lines.append((marker, verdict))
    if lines:
        terminalreporter.section("acceptance criteria")
        for name, verdict in sorted(lines):
            terminalreporter.write_line(f"{verdict}  {name}")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call":
        marker = item.get_closest_marker("acceptance")
        if marker is not None and marker.args:
            report.acceptance_name = marker.args[0]


def _bandit_factory(arms, *, gamma=1.0, horizon=1):
    """One-shot bandit: state 0 with one action per arm, absorbing state 1.

    Policy ids coincide with arm indices, which keeps expectations readable.
    """
    transitions = [[[(1, 1.0, list(arm))] for arm in arms], []]
    return make_momdp(transitions, gamma=gamma, horizon=horizon, terminal_states={1})


@pytest.fixture
def make_bandit():
    return _bandit_factory
