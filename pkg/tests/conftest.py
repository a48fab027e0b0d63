import os
import sys
from collections import defaultdict

import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

CRITERIA = {
    1: "closed-form trade-offs match the Neyman-Pearson oracle",
    2: "calibration ordering b_freq < b_l1 < b_eps",
    3: "bisection certificate and grid-oracle agreement",
    4: "analytic L2 costs match Monte Carlo",
    5: "Monte Carlo dominance ordering of costs",
    6: "zero-mean JS0 cost equals 2",
    7: "relative-efficiency crossovers",
    8: "private GOF type I error",
    9: "private GOF power monotonicity and ranking",
    10: "bivariate Laplace strictly above univariate",
    11: "empirical privacy of calibrated mechanisms",
    12: "determinism across thread counts",
}

_results = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        _results[marker.args[0]].append((item.name, rep.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(CRITERIA):
        runs = _results.get(n)
        if not runs:
            continue
        failed = [name for name, outcome in runs if outcome != "passed"]
        status = "PASS" if not failed else "FAIL"
        line = f"criterion {n:2d}: {status}  {CRITERIA[n]}"
        if failed:
            line += f"  (failing: {', '.join(failed)})"
        tr.write_line(line)
