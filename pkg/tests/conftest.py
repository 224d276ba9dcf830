import numpy as np
import pytest

from parcopula.copulas import CopulaFamily, CopulaModel

# one representative parameter per family, plus a negative Frank
MODELS = {
    "gaussian": CopulaModel("gaussian", 0.3),
    "gaussian_neg": CopulaModel("gaussian", -0.7),
    "frank": CopulaModel("frank", 5.0),
    "frank_neg": CopulaModel("frank", -3.0),
    "gumbel": CopulaModel("gumbel", 5.0),
    "gumbel_weak": CopulaModel("gumbel", 1.4),
}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=list(MODELS), ids=list(MODELS))
def model(request):
    return MODELS[request.param]


@pytest.fixture(params=list(CopulaFamily), ids=[f.value for f in CopulaFamily])
def family(request):
    return request.param


# --------------------------------------------------------------------------
# acceptance summary: one line per criterion at the end of the run


_RESULTS = []


def pytest_runtest_logreport(report):
    if "test_acceptance" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        number = dict(report.user_properties).get("criterion")
        detail = dict(report.user_properties).get("verdict", "")
        _RESULTS.append((report.nodeid.split("::")[-1], report.outcome, detail, number))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        rep.user_properties.append(("criterion", mark.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome, detail, number in sorted(_RESULTS, key=lambda r: (r[3] or 0, r[0])):
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[outcome]
        terminalreporter.write_line(f"criterion {number}: {status}  {name}  {detail}")
