"""Shared fixtures and the one-line-per-criterion acceptance summary."""

from __future__ import annotations

import io

import pytest

from closurevm import corpus
from closurevm.evaluator import Interpreter

CRITERIA = {
    1: "transcript reproduction",
    2: "constant closure-generation cost",
    3: "capture decision",
    4: "K(Z,1) oracle",
    5: "monoid bifunctor laws",
    6: "polynomiality probe",
    7: "determinism",
}

_outcomes: dict[int, list[bool]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number n")


def pytest_runtest_logreport(report):
    crit = getattr(report, "criterion", None)
    if crit is None:
        return
    if report.when == "call" or report.failed or report.skipped:
        _outcomes.setdefault(crit, []).append(report.passed and report.when == "call")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        outcome.get_result().criterion = marker.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n, title in CRITERIA.items():
        results = _outcomes.get(n)
        if results is None:
            status = "NOT RUN"
        else:
            status = "PASS" if all(results) else "FAIL"
        terminalreporter.write_line(f"criterion {n} ({title}): {status}")


@pytest.fixture
def interp() -> Interpreter:
    return Interpreter(out=io.StringIO())


def load_programs(interp: Interpreter, *names: str) -> None:
    interp.load(corpus.program_text(*names))
