import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from dpdgauss import get_preset

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


# interior parameter draws for each preset
def random_theta(name, rng):
    if name in ("exponential", "poisson"):
        return np.array([rng.uniform(0.5, 5.0)])
    if name == "normal1d":
        return np.array([rng.normal(0.0, 2.0), rng.uniform(0.3, 4.0)])
    if name == "mvnormal":
        a = rng.normal(size=(2, 2))
        s = a @ a.T + 0.5 * np.eye(2)
        return np.array([rng.normal(), rng.normal(), s[0, 0], s[1, 0], s[1, 1]])
    raise KeyError(name)


PRESET_NAMES = ("exponential", "poisson", "normal1d", "mvnormal")


@pytest.fixture(params=PRESET_NAMES)
def preset(request):
    return request.param, get_preset(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# -- acceptance summary: one PASS/FAIL line per criterion ----------------------------

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call" and not rep.failed:
        return
    number, title = marker.args
    detail = dict(item.user_properties).get("detail", "")
    prev = _CRITERIA.get(number)
    passed = rep.passed and (prev is None or prev[1])
    _CRITERIA[number] = (title, passed, detail or (prev[2] if prev else ""))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, passed, detail = _CRITERIA[number]
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {title}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
