from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graph_samples import random_cluster_graph, random_even_graph
from tdesign.architecture import Architecture, brickwork_1d
from tdesign.cluster_graph import (
    ClusterGraph,
    GraphError,
    RewriteTrace,
    add_edge,
    build_cluster_graph,
    contract,
    euler_reduce,
    eulerian_circuit,
    merge,
    remove_edge,
    replay,
    rewrite,
    split_connected,
    split_odd_strings,
    split_with_link,
    validate_shape,
)


def _cycle(n: int, w: int = 2) -> ClusterGraph:
    return ClusterGraph((w,) * n, tuple((i, (i + 1) % n) for i in range(n)))


def test_invariants_enforced():
    with pytest.raises(GraphError, match="self-loop"):
        ClusterGraph((2,), ((0, 0),))
    with pytest.raises(GraphError, match="degree"):
        ClusterGraph((1, 1), ((0, 1), (0, 1)))
    with pytest.raises(GraphError, match="non-positive"):
        ClusterGraph((0, 1))


def test_build_from_brickwork():
    g = build_cluster_graph(brickwork_1d(8, "periodic"), 0, 1)
    assert g.weights == (2, 2, 2, 2)
    assert len(g.edges) == 4
    assert validate_shape(g) == "loops"


def test_build_with_internal_gates_only():
    arch = Architecture(4, 2, [[(0, 1), (2, 3)], [(0, 1)]])
    g = build_cluster_graph(arch, 0, 1)
    assert g.edges == ()


def test_build_first_layer():
    arch = brickwork_1d(6, "periodic")
    g = build_cluster_graph(arch, -1, 0)
    assert g.weights == (1,) * 6
    assert len(g.edges) == 3


def test_merge_drops_internal_edges():
    g = merge(ClusterGraph((2, 2), ((0, 1), (0, 1))), 0, 1)
    assert g.weights == (4,)
    assert g.edges == ()
    with pytest.raises(GraphError):
        merge(ClusterGraph((2, 2)), 1, 1)


def test_split_with_link_example():
    g = ClusterGraph((2, 4, 2), ((0, 1), (1, 2)))
    out = split_with_link(g, 1, 2, [1])
    assert out.weights == (2, 2, 2, 2)
    assert sorted(out.edges) == [(0, 1), (1, 3), (2, 3)]
    with pytest.raises(GraphError, match="free sites"):
        split_with_link(ClusterGraph((2, 2), ((0, 1), (0, 1))), 0, 1, [0])


def test_split_connected_rejects_disconnection():
    g = ClusterGraph((2, 2), ((0, 1),))
    with pytest.raises(GraphError, match="disconnects"):
        split_connected(g, 0, 1, [])


def test_add_edge_beyond_capacity():
    g = ClusterGraph((1, 1), ((0, 1),))
    with pytest.raises(GraphError):
        add_edge(g, 0, 1)
    assert remove_edge(add_edge(ClusterGraph((2, 2), ((0, 1),)), 0, 1), 1).edges == ((0, 1),)


def test_rewrite_dispatch_and_unknown_rule():
    g = ClusterGraph((2, 2), ((0, 1),))
    assert rewrite(g, "add_edge", {"a": 0, "b": 1}) == add_edge(g, 0, 1)
    with pytest.raises(GraphError, match="unknown rule"):
        rewrite(g, "twist", {})


def test_trace_round_trips_through_json():
    trace = RewriteTrace(ClusterGraph((2, 4, 2), ((0, 1), (1, 2))))
    trace.apply("split_with_link", {"node": 1, "new_weight": 2, "moved_edges": [1]})
    trace.apply("merge", {"a": 0, "b": 1})
    data = json.loads(json.dumps(trace.to_dict()))
    assert replay(data) == trace.graph
    data["steps"][0]["graph"]["weights"][0] = 9
    with pytest.raises(GraphError, match="step 0"):
        replay(data)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 100_000))
def test_rewrites_conserve_weight(seed):
    rng = np.random.default_rng(seed)
    g = random_cluster_graph(rng)
    a, b = g.edges[0]
    assert merge(g, a, b).total_weight == g.total_weight
    node = int(np.argmax(g.weights))
    if g.weights[node] >= 2:
        try:
            out = split_connected(g, node, 1, g.incident(node)[:1])
        except GraphError:
            return
        assert out.total_weight == g.total_weight


def test_euler_examples():
    assert euler_reduce(_cycle(4)).loop_sizes == (8,)
    assert euler_reduce(ClusterGraph((4, 4), ((0, 1),) * 4)).loop_sizes == (8,)
    two = ClusterGraph((2,) * 8, tuple((i, (i + 1) % 4) for i in range(4)) + tuple((4 + i, 4 + (i + 1) % 4) for i in range(4)))
    assert euler_reduce(two).loop_sizes == (8, 8)


def test_euler_output_is_loops_and_trace_replays():
    for seed in range(20):
        g = random_even_graph(np.random.default_rng(seed))
        red = euler_reduce(g)
        assert validate_shape(red.graph) == "loops"
        assert all(w == 2 for w in red.graph.weights)
        assert red.graph.total_weight == g.total_weight
        assert replay(red.trace.to_dict()) == red.graph


def test_euler_precondition_names_node():
    with pytest.raises(GraphError, match="node 0 has odd degree"):
        euler_reduce(ClusterGraph((2, 2), ((0, 1),)))
    with pytest.raises(GraphError, match="odd weight"):
        euler_reduce(ClusterGraph((3, 2), ((0, 1), (0, 1))))


def test_eulerian_circuit_uses_each_edge_once():
    g = ClusterGraph((2, 4, 2), ((0, 1), (0, 1), (1, 2), (1, 2)))
    circuit = eulerian_circuit(g, 0)
    used = [e for _, e in circuit[1:]]
    assert sorted(used) == [0, 1, 2, 3]
    assert circuit[0][0] == circuit[-1][0] == 0


@pytest.mark.parametrize(
    "weights, shape",
    [((2, 4, 2), "brickwork_compatible_strings"), ((2, 3, 2), "strings")],
)
def test_validate_shape_paths(weights, shape):
    assert validate_shape(ClusterGraph(weights, ((0, 1), (1, 2)))) == shape


def test_validate_shape_loops_and_none():
    assert validate_shape(_cycle(4)) == "loops"
    star = ClusterGraph((3, 1, 1, 1), ((0, 1), (0, 2), (0, 3)))
    assert validate_shape(star) == "none"


def test_split_odd_strings_examples():
    even = ClusterGraph((2, 2, 2), ((0, 1), (1, 2)))
    out = split_odd_strings(even)
    assert out.first == even and out.second.edges == ()

    g = ClusterGraph((2, 3, 3, 2), ((0, 1), (1, 2), (2, 3)))
    out = split_odd_strings(g)
    assert validate_shape(out.first) == validate_shape(out.second) == "brickwork_compatible_strings"
    assert len(out.removed_edges) == 2
    final, _ = contract(out.second)
    assert final.weights == (10,)

    end_odd = ClusterGraph((3, 2, 2), ((0, 1), (1, 2)))
    assert split_odd_strings(end_odd).removed_edges == ()


def test_split_odd_strings_rejects_non_strings():
    with pytest.raises(GraphError, match="not a string"):
        split_odd_strings(_cycle(3))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(1, 5), min_size=2, max_size=9))
def test_split_odd_strings_contracts_like_input(weights):
    weights = [max(w, 2) if 0 < i < len(weights) - 1 else w for i, w in enumerate(weights)]
    g = ClusterGraph(tuple(weights), tuple((i, i + 1) for i in range(len(weights) - 1)))
    out = split_odd_strings(g)
    assert validate_shape(out.first) == "brickwork_compatible_strings"
    assert validate_shape(out.second) == "brickwork_compatible_strings"
    assert contract(out.second)[0].weights == contract(g)[0].weights
