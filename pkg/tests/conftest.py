import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile("ci", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("dev", max_examples=50, deadline=None)
settings.register_profile("thorough", max_examples=2000, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ci"))


@st.composite
def dyadic_matrices(draw, max_side=8, max_bits=8):
    """(numerators, bits) for a random l-bit matrix in [0, 1)."""
    m = draw(st.integers(1, max_side))
    n = draw(st.integers(1, max_side))
    bits = draw(st.integers(1, max_bits))
    flat = draw(st.lists(st.integers(0, (1 << bits) - 1), min_size=m * n, max_size=m * n))
    return np.array(flat, dtype=np.int64).reshape(m, n), bits


@st.composite
def half_layers(draw, max_side=10):
    """Doubled {0, 1/2, 1} matrices."""
    m = draw(st.integers(1, max_side))
    n = draw(st.integers(1, max_side))
    flat = draw(st.lists(st.integers(0, 2), min_size=m * n, max_size=m * n))
    return np.array(flat, dtype=np.int8).reshape(m, n)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
