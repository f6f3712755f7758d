import math
import sys
from pathlib import Path

import pytest

from curvelab import surfaces as S

sys.path.insert(0, str(Path(__file__).parent))

SUITE = {
    "sphere(1)": lambda: S.sphere(1.0),
    "sphere(2)": lambda: S.sphere(2.0),
    "helicoid(1,0)": lambda: S.helicoid(1.0, 0.0),
    "helicoid(2,1)": lambda: S.helicoid(2.0, 1.0),
    "quadric1(-1,-1,1)": lambda: S.quadric1(-1, -1, 1),
    "quadric1(2,3,1)": lambda: S.quadric1(2, 3, 1),
    "quadric2(1,1)": lambda: S.quadric2(1, 1),
    "quadric2(2,3)": lambda: S.quadric2(2, 3),
    "catenoid": lambda: S.catenoid(),
    "torus(2,0.5)": lambda: S.torus(2.0, 0.5),
}


@pytest.fixture(params=sorted(SUITE), scope="module")
def suite_patch(request):
    return SUITE[request.param]()


def close(a, b, tol):
    return math.isclose(a, b, rel_tol=tol, abs_tol=tol)


# -- acceptance summary -------------------------------------------------------------

_CRITERIA: dict[int, list[tuple[str, str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        if hasattr(rep, "wasxfail"):
            state = "XFAIL"
        elif rep.passed:
            state = "PASS"
        elif rep.skipped:
            state = "SKIP"
        else:
            state = "FAIL"
        _CRITERIA.setdefault(marker.args[0], []).append((item.name, state))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        states = [s for _, s in _CRITERIA[n]]
        verdict = "PASS" if all(s == "PASS" for s in states) else "FAIL"
        notes = [f"{name}: {s}" for name, s in _CRITERIA[n] if s != "PASS"]
        extra = f" ({'; '.join(notes)})" if notes else ""
        terminalreporter.write_line(f"criterion {n:2d}: {verdict} [{states.count('PASS')}/{len(states)} checks]{extra}")
