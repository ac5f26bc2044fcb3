import random

import pytest
from hypothesis import settings, strategies as st

from nilrec import nilgroup

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@st.composite
def unitriangular(draw, n=None, bound=20):
    n = n if n is not None else draw(st.integers(2, 5))
    vals = {}
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            vals[i, j] = draw(st.integers(-bound, bound))
    return nilgroup.from_upper(n, vals)


def naive_matmul(a, b):
    """Plain full-matrix product, no triangular shortcuts."""
    n = len(a)
    return [[sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n)] for i in range(n)]


@pytest.fixture
def rng():
    return random.Random(12345)


ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
