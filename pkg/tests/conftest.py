import os

import pytest
from hypothesis import HealthCheck, settings

from twinpmp import SweepSettings, closed_loop_coupled_run, solve_p1
from twinpmp.fixtures import benchmark_scenario

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=500, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# settings that let the sweep settle once the bounds no longer saturate the control
WIDE_SETTINGS = SweepSettings(anderson_memory=10, max_iterations=2000)


class BenchmarkRun:
    def __init__(self, scenario, settings=None):
        self.scenario = scenario
        self.settings = settings or SweepSettings()
        self.p1 = solve_p1(scenario, self.settings)
        self.coupled = closed_loop_coupled_run(scenario, self.settings)
        self.p2 = self.coupled.solution


@pytest.fixture(scope="session")
def bench():
    return BenchmarkRun(benchmark_scenario())


@pytest.fixture(scope="session")
def bench_beta0():
    return BenchmarkRun(benchmark_scenario(beta=0.0))


@pytest.fixture(scope="session")
def bench_wide():
    return BenchmarkRun(benchmark_scenario(u_lo=-5000.0, u_hi=5000.0), WIDE_SETTINGS)


# --- acceptance summary: one PASS/FAIL line per criterion ------------------------------

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(cid, text): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or (rep.when != "call" and not rep.failed):
        return
    details = "; ".join(f"{k}={v}" for k, v in item.user_properties)
    cid, text = mark.args
    _CRITERIA[cid] = (text, "PASS" if rep.passed else "FAIL", details)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for cid in sorted(_CRITERIA):
        text, status, details = _CRITERIA[cid]
        line = f"{cid} {status}  {text}"
        terminalreporter.write_line(line + (f"  [{details}]" if details else ""))
