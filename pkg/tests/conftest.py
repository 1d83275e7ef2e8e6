import sys

import pytest
from hypothesis import HealthCheck, settings

from bellfield.model import SceneParams, build_covariance

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def mink_gamma():
    return build_covariance(SceneParams.minkowski(3.0, 0.1))


@pytest.fixture(scope="session")
def ds_gamma():
    return build_covariance(SceneParams.desitter(1.0, 3.0, 1e-4, 0.1))


@pytest.fixture(scope="session")
def ds_large_gamma():
    return build_covariance(SceneParams.desitter(30.0, 3.0, 1e-4, 0.1))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = [mod.RESULTS[k] for k in sorted(mod.RESULTS)] if mod else []
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
