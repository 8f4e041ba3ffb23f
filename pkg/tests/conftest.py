"""Shared fixtures and the acceptance summary printed at the end of a run."""

from collections import defaultdict

import numpy as np
import pytest

CRITERIA = {
    1: "Penrose soundness",
    2: "Tikhonov route",
    3: "EP equivalence",
    4: "Factorizations",
    5: "Block formula",
    6: "Products",
    7: "Shift/projection counterexample",
    8: "Compact-operator algebras",
    9: "CLI determinism and exit codes",
}

_criterion_of: dict[str, int] = {}
_outcomes: dict[int, list[bool]] = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion covered by the test")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            _criterion_of[item.nodeid] = mark.args[0]


def pytest_runtest_logreport(report):
    n = _criterion_of.get(report.nodeid)
    if n is None:
        return
    if report.when == "call" or report.failed:
        _outcomes[n].append(report.passed)


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
def rng():
    return np.random.default_rng(20240611)
