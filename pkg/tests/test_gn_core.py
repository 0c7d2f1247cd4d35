import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gncoset.gn_core import (GraphId, gn_transform, gn_transform_inplace, kron_matrix, map_index,
                             subcode_view, unmap_index)


def bitvecs(max_n=10):
    return st.integers(1, max_n).flatmap(
        lambda n: st.lists(st.integers(0, 1), min_size=2 ** n, max_size=2 ** n))


def test_small_examples():
    assert gn_transform([0, 0]).tolist() == [0, 0]
    assert gn_transform([0, 1]).tolist() == [1, 1]
    assert gn_transform([1, 0]).tolist() == [1, 0]


def test_matches_dense_matrix(rng):
    u = rng.integers(0, 2, 64)
    expected = (u @ kron_matrix(6).astype(int)) & 1
    assert np.array_equal(gn_transform(u), expected)


def test_kron_matrix_examples():
    assert kron_matrix(1).tolist() == [[1, 0], [1, 1]]
    assert kron_matrix(2).tolist() == [[1, 0, 0, 0], [1, 1, 0, 0], [1, 0, 1, 0], [1, 1, 1, 1]]
    g = kron_matrix(3).astype(int)
    assert np.array_equal((g @ g) & 1, np.eye(8, dtype=int))


def test_kron_matrix_refuses_large():
    with pytest.raises(ValueError):
        kron_matrix(11)


@pytest.mark.parametrize("bad", [[1, 0, 1], [1], list(range(6))])
def test_rejects_bad_length(bad):
    with pytest.raises(ValueError):
        gn_transform(np.array(bad) % 2)


def test_inplace_uses_buffer(rng):
    buf = rng.integers(0, 2, (3, 16)).astype(np.uint8)
    expected = gn_transform(buf)
    out = gn_transform_inplace(buf)
    assert out is buf
    assert np.array_equal(buf, expected)


@settings(max_examples=60, deadline=None)
@given(bitvecs())
def test_involution(u):
    assert np.array_equal(gn_transform(gn_transform(u)), np.array(u))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 10).flatmap(lambda n: st.tuples(
    st.lists(st.integers(0, 1), min_size=2 ** n, max_size=2 ** n),
    st.lists(st.integers(0, 1), min_size=2 ** n, max_size=2 ** n))))
def test_linearity(pair):
    a, b = (np.array(v) for v in pair)
    assert np.array_equal(gn_transform(a ^ b), gn_transform(a) ^ gn_transform(b))


def test_map_index_examples():
    assert map_index(3, 5, GraphId.G, 128) == 643
    assert map_index(3, 5, GraphId.GPI, 128) == 389
    assert map_index(7, 7, "G", 128) == map_index(7, 7, "Gpi", 128) == 903


def test_map_index_out_of_range():
    with pytest.raises(ValueError):
        map_index(8, 0, GraphId.G, 8)
    with pytest.raises(ValueError):
        map_index(0, -1, GraphId.GPI, 8)


@pytest.mark.parametrize("graph", list(GraphId))
def test_map_index_bijective(graph):
    n = 16
    ks = {map_index(i, j, graph, n) for i in range(n) for j in range(n)}
    assert ks == set(range(n * n))
    for k in range(n * n):
        assert map_index(*unmap_index(k, graph, n), graph, n) == k


def test_graphs_are_transposes():
    n = 8
    for i in range(n):
        for j in range(n):
            assert map_index(i, j, GraphId.G, n) == map_index(j, i, GraphId.GPI, n)


def test_subcode_view_follows_map_index():
    n = 4
    x = np.arange(n * n)[None, :]
    for graph in GraphId:
        view = subcode_view(x, graph, n)[0]
        for i in range(n):
            for j in range(n):
                assert view[i, j] == map_index(i, j, graph, n)


def test_graph_alternation():
    assert GraphId.for_iteration(1) is GraphId.G
    assert GraphId.for_iteration(2) is GraphId.GPI
    assert GraphId.G.other is GraphId.GPI
