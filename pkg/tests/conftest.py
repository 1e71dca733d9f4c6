"""Collects acceptance outcomes and prints one line per criterion at the end of the run."""

import pytest

CRITERIA = {
    1: "Cauchy density oracle",
    2: "kernel normalization and Chapman-Kolmogorov",
    3: "single-mode square function constant and p=2 bound",
    4: "square function Lp property suite",
    5: "kernel, jump and fractional kernel bounds",
    6: "density scaling identity",
    7: "sharp domination and local oscillation",
    8: "space-time multiplier bound",
    9: "SPDE isometry and deterministic limb",
    10: "SPDE a priori estimate family",
    11: "simulator cross-validation",
    12: "catalog scaling, derivative and tail checks",
}

_outcomes: dict[int, list[bool]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_runtest_logreport(report):
    marker = getattr(report, "criterion", None)
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _outcomes.setdefault(marker, []).append(report.outcome == "passed")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        outcome.get_result().criterion = mark.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n, title in CRITERIA.items():
        runs = _outcomes.get(n)
        status = "NOT RUN" if runs is None else ("PASS" if all(runs) else "FAIL")
        terminalreporter.write_line(f"criterion {n:2d}: {status:7s} {title}")
