import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hadamard_means import EuclideanSpace, HyperboloidSpace, SPDSpace

settings.register_profile(
    "default", max_examples=60, deadline=None,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# filled by test_acceptance.py, printed in the terminal summary
ACCEPTANCE_REPORT = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=["euclid", "spd", "hyperboloid"])
def space(request):
    return {"euclid": EuclideanSpace(4), "spd": SPDSpace(3),
            "hyperboloid": HyperboloidSpace(3)}[request.param]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_REPORT:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_REPORT:
            terminalreporter.write_line(line)
