import numpy as np
import pytest
from hypothesis import strategies as st

from lpdecode import TannerGraph

H1 = [[1, 1, 1, 0], [0, 1, 1, 1]]
HAMMING = [[1, 1, 1, 0, 1, 0, 0],
           [1, 1, 0, 1, 0, 1, 0],
           [1, 0, 1, 1, 0, 0, 1]]


@pytest.fixture
def h1():
    return TannerGraph.from_dense(H1)


@pytest.fixture
def hamming():
    return TannerGraph.from_dense(HAMMING)


def random_graph(rng, m, n, density=0.4):
    """Random binary H with every row and column nonempty."""
    h = (rng.random((m, n)) < density).astype(np.int8)
    for j in range(m):
        if not h[j].any():
            h[j, rng.integers(n)] = 1
    for i in range(n):
        if not h[:, i].any():
            h[rng.integers(m), i] = 1
    return TannerGraph.from_dense(h)


@st.composite
def graphs(draw, max_m=6, max_n=10):
    m = draw(st.integers(1, max_m))
    n = draw(st.integers(2, max_n))
    seed = draw(st.integers(0, 2**31 - 1))
    return random_graph(np.random.default_rng(seed), m, n)
