import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from lgt.quadrature import GeometricGrid
from lgt.rearrangement import SampledKernel, StepFunction

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@st.composite
def step_functions(draw, max_knots=12, allow_zero=True):
    n = draw(st.integers(1, max_knots))
    widths = draw(st.lists(st.floats(1e-3, 10.0), min_size=n, max_size=n))
    lo = 0.0 if allow_zero else 1e-3
    values = draw(st.lists(st.floats(lo, 100.0), min_size=n, max_size=n))
    return StepFunction(np.cumsum(widths), np.array(values))


@st.composite
def sampled_kernels(draw, max_dim=6):
    n = draw(st.integers(1, max_dim))
    m = draw(st.integers(1, max_dim))
    xm = draw(st.lists(st.floats(1e-2, 5.0), min_size=n, max_size=n))
    ym = draw(st.lists(st.floats(1e-2, 5.0), min_size=m, max_size=m))
    vals = draw(st.lists(st.floats(0.0, 10.0), min_size=n * m, max_size=n * m))
    return SampledKernel(np.array(xm), np.array(ym), np.array(vals).reshape(n, m))


@pytest.fixture(scope="session")
def coarse_grid():
    return GeometricGrid(1e-6, 1e6, 16)


ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {number:2d} {name}: {detail}")
