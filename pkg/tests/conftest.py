import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from planar_friction import P0, P1, circle, discretize, gradient_line, precompute, square

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def circle_grid():
    return discretize(circle(0.01), 21)


@pytest.fixture(scope="session")
def square_grid():
    return discretize(square(0.02), 21)


@pytest.fixture(scope="session")
def grad_grid():
    return discretize(gradient_line(0.02), 21)


@pytest.fixture(scope="session")
def circle_table(circle_grid):
    return precompute(circle_grid, 20)


@pytest.fixture(scope="session")
def grad_table(grad_grid):
    return precompute(grad_grid, 20)


@pytest.fixture(params=["p0", "p1"])
def preset(request):
    return {"p0": P0, "p1": P1}[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# -- acceptance summary ------------------------------------------------------

_CRITERIA = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.split("::")[-1]
    if "test_acceptance.py" not in report.nodeid or not name.startswith("test_criterion_"):
        return
    if report.when == "call" or report.outcome != "passed":
        key = name.split("[")[0][len("test_criterion_"):]
        entry = _CRITERIA.setdefault(key, {"ok": True, "seconds": 0.0})
        entry["ok"] &= report.outcome == "passed"
        entry["seconds"] += report.duration


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_CRITERIA):
        e = _CRITERIA[key]
        num, _, label = key.partition("_")
        status = "PASS" if e["ok"] else "FAIL"
        terminalreporter.write_line(f"criterion {int(num):2d}  {status}  {label.replace('_', ' ')}  ({e['seconds']:.1f} s)")
