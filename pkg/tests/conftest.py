import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from bettilab.curve_family import make_point
from bettilab.errors import BettiLabError

settings.register_profile(
    "default", deadline=None, max_examples=25, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def bounded_complex(r=3.0):
    return st.builds(complex, st.floats(-r, r), st.floats(-r, r))


def point_or_none(model, params):
    try:
        return make_point(model, params)
    except BettiLabError:
        return None


def well_separated(p, tol=0.05):
    roots = np.array(p._roots)
    d = np.abs(roots[:, None] - roots[None, :]) + np.eye(len(roots)) * 1e9
    return d.min() > tol


# acceptance lines collected by tests/test_acceptance.py
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line[1])
