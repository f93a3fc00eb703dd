import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

from supranet.graph import build_graph

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")


@pytest.fixture
def k3():
    return build_graph(3, [(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def p2():
    return build_graph(2, [(0, 1)])


@pytest.fixture
def p3():
    return build_graph(3, [(0, 1), (1, 2)])


@st.composite
def graphs(draw, min_n=2, max_n=12, connected=False):
    """Random simple graphs; ``connected`` adds a random spanning tree first."""
    n = draw(st.integers(min_n, max_n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    chosen = set()
    if connected:
        order = draw(st.permutations(range(n)))
        for pos in range(1, n):
            parent = order[draw(st.integers(0, pos - 1))]
            a, b = sorted((order[pos], parent))
            chosen.add((a, b))
    extra = draw(st.lists(st.sampled_from(pairs), max_size=2 * n)) if pairs else []
    chosen.update(extra)
    return build_graph(n, sorted(chosen))


def dense_fiedler(q):
    w = np.linalg.eigvalsh(q.toarray() if hasattr(q, "toarray") else q)
    return w[1]
