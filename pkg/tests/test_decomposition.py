from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tdesign.cluster_graph import ClusterGraph, GraphError, validate_shape
from tdesign.decomposition import (
    heavy_path_tree_height,
    loglog_decompose,
    loglog_layer_bound,
    tree_decompose,
    tree_layer_bound,
)


def _random_tree(rng: np.random.Generator, n: int, max_degree: int, extra_edges: int = 0) -> ClusterGraph:
    deg = [0] * n
    edges = []
    for v in range(1, n):
        u = int(rng.choice([u for u in range(v) if deg[u] < max_degree]))
        edges.append((u, v))
        deg[u] += 1
        deg[v] += 1
    for _ in range(extra_edges):
        a, b = (int(x) for x in rng.choice(n, 2, replace=False))
        edges.append((a, b))
        deg[a] += 1
        deg[b] += 1
    weights = [max(1, d + int(rng.integers(0, 3))) for d in deg]
    return ClusterGraph(tuple(weights), tuple(edges))


def _path(n: int, w: int = 2) -> ClusterGraph:
    return ClusterGraph((w,) * n, tuple((i, i + 1) for i in range(n - 1)))


def test_closed_form_ceilings():
    assert tree_layer_bound(4, 64) == 24
    assert tree_layer_bound(20, 8) == 2 * 6 * 3
    assert loglog_layer_bound(15) == 18
    assert loglog_layer_bound(3) == 10


def test_star_decomposition():
    star = ClusterGraph((6,) + (2,) * 6, tuple((0, i) for i in range(1, 7)))
    dec = tree_decompose(star)
    assert dec.num_layers <= 8
    assert dec.verify_contraction()


def test_path_is_one_layer():
    dec = tree_decompose(_path(8))
    assert dec.num_layers == 1
    assert dec.certificates == ["brickwork_compatible_strings"]


def test_random_tree_64():
    tree = _random_tree(np.random.default_rng(64), 64, 4)
    dec = tree_decompose(tree)
    assert dec.num_layers <= tree_layer_bound(max(tree.degrees()), 64) <= 24
    assert dec.verify_contraction()


def test_loglog_examples():
    rng = np.random.default_rng(15)
    for _ in range(10):
        dec = loglog_decompose(_random_tree(rng, 15, 5))
        assert dec.num_layers <= 18
        assert dec.verify_contraction()
    small = loglog_decompose(_path(3))
    assert 1 <= small.num_layers <= 2


def test_heavy_path_height_balanced_binary():
    edges = tuple(((i - 1) // 2, i) for i in range(1, 31))
    deg = [0] * 31
    for a, b in edges:
        deg[a] += 1
        deg[b] += 1
    tree = ClusterGraph(tuple(max(d, 1) for d in deg), edges)
    assert heavy_path_tree_height(tree) <= math.floor(math.log2(32)) - 1


def test_non_tree_edges_are_dropped():
    g = _random_tree(np.random.default_rng(2), 12, 3, extra_edges=3)
    for dec in (tree_decompose(g), loglog_decompose(g)):
        assert len(dec.dropped_edges) == 3
        assert len(dec.tree_edges) == 11
        assert dec.verify_contraction()


def test_disconnected_input_rejected():
    g = ClusterGraph((2, 2, 2, 2), ((0, 1), (2, 3)))
    with pytest.raises(GraphError):
        tree_decompose(g)
    with pytest.raises(GraphError):
        loglog_decompose(g)


def test_single_node():
    dec = tree_decompose(ClusterGraph((3,)))
    assert dec.num_layers == 0
    assert dec.verify_contraction()


def test_to_dict_records_verification():
    d = loglog_decompose(_random_tree(np.random.default_rng(1), 20, 4)).to_dict()
    assert d["contraction_verified"] is True
    assert d["num_layers"] == len(d["layers"]) <= d["bound"]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 1_000_000), st.integers(2, 64), st.integers(2, 10))
def test_decompositions_respect_ceilings(seed, n, max_degree):
    tree = _random_tree(np.random.default_rng(seed), n, max_degree)
    d = max(tree.degrees())
    for dec, cap in ((tree_decompose(tree), tree_layer_bound(d, n)), (loglog_decompose(tree), loglog_layer_bound(n))):
        assert dec.num_layers <= cap
        assert all(validate_shape(step.graph) == "brickwork_compatible_strings" for step in dec.steps)
        assert dec.verify_contraction()
