import sys

import numpy as np
import pytest
from hypothesis import settings, strategies as st

from affcap import box
from affcap.corpus import random_convex_polygon, random_star_polygon

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def square():
    return box([0, 0], [1, 1])


@pytest.fixture
def cube():
    return box([0, 0, 0], [1, 1, 1])


seeds = st.integers(min_value=0, max_value=2**32 - 1)


@st.composite
def convex_polygons(draw):
    return random_convex_polygon(np.random.default_rng(draw(seeds)))


@st.composite
def star_polygons(draw):
    return random_star_polygon(np.random.default_rng(draw(seeds)))


@st.composite
def unit_vectors(draw, n=2):
    rng = np.random.default_rng(draw(seeds))
    u = rng.normal(size=n)
    return u / np.linalg.norm(u)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
