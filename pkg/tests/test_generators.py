import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from supranet.errors import GenerationFailed, ParameterError
from supranet.generators import (
    GenSpec,
    gen_barabasi_albert,
    gen_lattice_3d_torus,
    gen_random_regular,
    gen_watts_strogatz,
    generate,
    make_rng,
)
from supranet.graph import Graph, format_edge_list, is_connected


def to_nx(g: Graph) -> nx.Graph:
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edges.tolist())
    return h


def test_rng_is_pcg64():
    assert isinstance(make_rng(5).bit_generator, np.random.PCG64)
    a = make_rng(np.random.SeedSequence(5)).random(3)
    np.testing.assert_array_equal(a, make_rng(5).random(3))


@pytest.mark.parametrize("seed", range(5))
def test_rr_four_cycle(seed):
    g = gen_random_regular(4, 2, seed)
    assert nx.is_isomorphic(to_nx(g), nx.cycle_graph(4))


def test_rr_parity():
    with pytest.raises(ParameterError):
        gen_random_regular(5, 3, 0)
    with pytest.raises(ParameterError):
        gen_random_regular(4, 4, 0)


def test_rr_degrees():
    g = gen_random_regular(100, 4, 1)
    assert g.num_edges == 200
    assert set(g.degrees().tolist()) == {4}
    assert nx.is_connected(to_nx(g))


def test_rr_impossible_connected_raises():
    # every 1-regular graph on 4 nodes is a perfect matching, never connected
    with pytest.raises(GenerationFailed):
        gen_random_regular(4, 1, 0, max_retries=20)


def test_ba_three_nodes():
    shapes = set()
    for seed in range(20):
        g = gen_barabasi_albert(3, 1, seed)
        assert g.num_edges == 2
        shapes.add(tuple(sorted(g.degrees().tolist())))
    assert shapes == {(1, 1, 2)}


def test_ba_edge_count_and_tail():
    g = gen_barabasi_albert(1000, 3, 2)
    assert g.num_edges == 3 + 997 * 3
    assert is_connected(g)
    deg = g.degrees()
    assert deg.min() >= 3
    assert deg.max() > 8 * deg.mean()


def test_ba_invalid():
    with pytest.raises(ParameterError):
        gen_barabasi_albert(2, 2, 0)


def test_ws_ring():
    g = gen_watts_strogatz(6, 2, 0.0, 0)
    assert nx.is_isomorphic(to_nx(g), nx.cycle_graph(6))
    g = gen_watts_strogatz(6, 4, 0.0, 0)
    assert g.num_edges == 12
    assert to_nx(g).edges == nx.watts_strogatz_graph(6, 4, 0.0).edges


def test_ws_edge_count_conserved():
    g = gen_watts_strogatz(1000, 4, 0.1, 3)
    assert g.num_edges == 2000
    assert is_connected(g)
    ring = {tuple(e) for e in gen_watts_strogatz(1000, 4, 0.0, 3).edges.tolist()}
    moved = len({tuple(e) for e in g.edges.tolist()} - ring)
    assert 100 < moved < 300


@pytest.mark.parametrize("k,p", [(3, 0.1), (0, 0.1), (4, 1.5), (6, 0.1)])
def test_ws_invalid(k, p):
    with pytest.raises(ParameterError):
        gen_watts_strogatz(6, k, p, 0)


def test_torus_side3():
    g = gen_lattice_3d_torus(3)
    assert g.n == 27 and g.num_edges == 81
    assert set(g.degrees().tolist()) == {6}
    oracle = nx.grid_graph(dim=[3, 3, 3], periodic=True)
    assert nx.is_isomorphic(to_nx(g), oracle)


def test_torus_side2():
    g = gen_lattice_3d_torus(2)
    assert g.n == 8 and g.num_edges == 12
    assert set(g.degrees().tolist()) == {3}


def test_torus_invalid():
    with pytest.raises(ParameterError):
        gen_lattice_3d_torus(1)


def test_torus_indexing():
    g = gen_lattice_3d_torus(4)
    nbrs = {tuple(e) for e in g.edges.tolist()}
    # node (x, y, z) = x + 4y + 16z
    assert (0, 1) in nbrs and (0, 4) in nbrs and (0, 16) in nbrs and (0, 3) in nbrs
    assert (0, 48) in nbrs


def test_genspec_validation():
    assert GenSpec("la", n=27).side == 3
    assert GenSpec("LA", side=4).n == 64
    with pytest.raises(ParameterError):
        GenSpec("LA", n=30, side=3)
    with pytest.raises(ParameterError):
        GenSpec("XX", n=10)
    with pytest.raises(ParameterError):
        GenSpec("RR", n=5, k=3)
    with pytest.raises(ParameterError):
        GenSpec("WS", n=10, k=3)
    with pytest.raises(ParameterError):
        GenSpec("BA", n=3, m=3)


@pytest.mark.parametrize("model", ["RR", "BA", "WS"])
def test_determinism(model):
    spec = GenSpec(model, n=200, seed=11)
    a, b = generate(spec), generate(spec)
    assert format_edge_list(a) == format_edge_list(b)
    assert generate(GenSpec(model, n=200, seed=12)) != a


@pytest.mark.parametrize("model", ["RR", "BA", "WS", "LA"])
def test_matched_defaults(model):
    g = generate(GenSpec(model, n=343, seed=0))
    assert g.n == 343
    assert is_connected(g)
    assert abs(g.num_edges - 3 * 343) <= 12


@given(st.integers(3, 40).map(lambda h: 2 * h), st.sampled_from([2, 3, 4]),
       st.integers(0, 2**32 - 1))
def test_rr_property(n, k, seed):
    g = gen_random_regular(n, k, seed)
    assert np.all(g.degrees() == k)
    assert nx.is_connected(to_nx(g))


@given(st.integers(7, 60), st.sampled_from([2, 4, 6]), st.floats(0, 1),
       st.integers(0, 2**32 - 1))
def test_ws_property(n, k, p, seed):
    g = gen_watts_strogatz(n, k, p, seed)
    assert g.num_edges == n * k // 2
    assert is_connected(g)


@given(st.integers(2, 60), st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_ba_property(n, m, seed):
    if m >= n:
        return
    g = gen_barabasi_albert(n, m, seed)
    assert g.num_edges == m * (m + 1) // 2 + (n - m - 1) * m
    assert is_connected(g)
