"""Cluster-merging graphs and the rewrite rules that bound their spectral gap.

A cluster-merging graph describes one layer against the clusters built by the
layers before it: node ``i`` is a cluster of ``weights[i]`` sites and every edge
is a 2-site gate joining two different clusters. Gates inside a cluster act
trivially on its uniform states, so they are omitted.

Rewrites return new graphs and keep edge indices stable where they can: splits
re-point edges in place and append new link edges; ``merge`` drops the edges
joining the merged nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from tdesign.architecture import Architecture, DisjointSets, component_labels


class GraphError(ValueError):
    """A rewrite precondition or graph invariant failed."""


@dataclass(frozen=True)
class ClusterGraph:
    """Weighted multigraph; ``edges`` is an ordered multiset of node pairs."""

    weights: tuple[int, ...]
    edges: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        weights = tuple(int(w) for w in self.weights)
        edges = tuple(tuple(sorted((int(a), int(b)))) for a, b in self.edges)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "edges", edges)
        n = len(weights)
        for i, w in enumerate(weights):
            if w < 1:
                raise GraphError(f"node {i} has non-positive weight {w}")
        for e, (a, b) in enumerate(edges):
            if not (0 <= a < n and 0 <= b < n):
                raise GraphError(f"edge {e} ({a}, {b}) references a missing node")
            if a == b:
                raise GraphError(f"edge {e} is a self-loop on node {a}")
        for i, deg in enumerate(self.degrees()):
            if deg > weights[i]:
                raise GraphError(f"node {i} has degree {deg} above its weight {weights[i]}")

    @property
    def num_nodes(self) -> int:
        return len(self.weights)

    @property
    def total_weight(self) -> int:
        return sum(self.weights)

    def degrees(self) -> list[int]:
        deg = [0] * len(self.weights)
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg

    def degree(self, node: int) -> int:
        return sum((a == node) + (b == node) for a, b in self.edges)

    def incident(self, node: int) -> list[int]:
        """Indices of edges touching ``node``, ascending."""
        return [e for e, (a, b) in enumerate(self.edges) if node in (a, b)]

    def other_end(self, edge: int, node: int) -> int:
        a, b = self.edges[edge]
        return b if a == node else a

    def components(self) -> list[list[int]]:
        """Node lists of connected components, ordered by smallest node."""
        dsu = DisjointSets(self.num_nodes)
        for a, b in self.edges:
            dsu.union(a, b)
        groups: dict[int, list[int]] = {}
        for node in range(self.num_nodes):
            groups.setdefault(dsu.find(node), []).append(node)
        return sorted(groups.values(), key=lambda c: c[0])

    def is_connected(self) -> bool:
        return len(self.components()) == 1

    def to_dict(self) -> dict:
        return {"weights": list(self.weights), "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_dict(cls, data: dict) -> ClusterGraph:
        if not isinstance(data, dict) or "weights" not in data:
            raise GraphError("cluster graph JSON needs a 'weights' list")
        return cls(tuple(data["weights"]), tuple(tuple(e) for e in data.get("edges", [])))


def build_cluster_graph(arch: Architecture, merged_through: int, layer: int) -> ClusterGraph:
    """Cluster graph of ``layer`` over the clusters of layers ``0..merged_through``.

    ``merged_through = -1`` means no prior layers (every site its own cluster).
    Nodes are numbered by their smallest site.
    """
    if not -1 <= merged_through < layer < arch.num_layers:
        raise GraphError(
            f"need -1 <= merged_through < layer < {arch.num_layers}, got {merged_through}, {layer}"
        )
    labels = component_labels(arch.num_sites, arch.layers[: merged_through + 1])
    weights = [0] * (max(labels) + 1)
    for lab in labels:
        weights[lab] += 1
    edges = []
    for gi, gate in enumerate(arch.layers[layer]):
        if len(gate) != 2:
            raise GraphError(f"layer {layer}, gate {gi}: cluster graphs need 2-site gates, got {list(gate)}")
        a, b = labels[gate[0]], labels[gate[1]]
        if a != b:
            edges.append((a, b))
    return ClusterGraph(tuple(weights), tuple(edges))


def cluster_sites(arch: Architecture, merged_through: int) -> list[list[int]]:
    """Sites of each node of :func:`build_cluster_graph` at ``merged_through``."""
    labels = component_labels(arch.num_sites, arch.layers[: merged_through + 1])
    out: list[list[int]] = [[] for _ in range(max(labels) + 1)]
    for site, lab in enumerate(labels):
        out[lab].append(site)
    return out


def contract(g: ClusterGraph) -> tuple[ClusterGraph, list[int]]:
    """Merge every connected component into one node.

    Returns the edgeless contracted graph and the component index of each node.
    """
    comps = g.components()
    node_map = [0] * g.num_nodes
    for ci, comp in enumerate(comps):
        for node in comp:
            node_map[node] = ci
    weights = tuple(sum(g.weights[n] for n in comp) for comp in comps)
    return ClusterGraph(weights, ()), node_map


# -------------------------------------------------------------------- rewrites


def _check_node(g: ClusterGraph, node: int, name: str = "node") -> None:
    if not 0 <= node < g.num_nodes:
        raise GraphError(f"{name} {node} not in graph with {g.num_nodes} nodes")


def merge(g: ClusterGraph, a: int, b: int) -> ClusterGraph:
    """Join nodes ``a`` and ``b`` into one node at index ``min(a, b)``.

    Edges between them become internal and are dropped; nodes above the removed
    index shift down by one.
    """
    _check_node(g, a, "a")
    _check_node(g, b, "b")
    if a == b:
        raise GraphError("merge needs two distinct nodes")
    keep, drop = min(a, b), max(a, b)

    def relabel(x: int) -> int:
        if x == drop:
            return keep
        return x - 1 if x > drop else x

    weights = list(g.weights)
    weights[keep] += weights[drop]
    del weights[drop]
    edges = [(relabel(x), relabel(y)) for x, y in g.edges if {x, y} != {a, b}]
    return ClusterGraph(tuple(weights), tuple(edges))


def _split(g: ClusterGraph, node: int, new_weight: int, moved_edges: Sequence[int], link: bool) -> ClusterGraph:
    _check_node(g, node)
    w = g.weights[node]
    if not 1 <= new_weight < w:
        raise GraphError(f"split of node {node} (weight {w}) needs 1 <= new_weight < {w}, got {new_weight}")
    moved = sorted(set(int(e) for e in moved_edges))
    if len(moved) != len(moved_edges):
        raise GraphError(f"moved edges {list(moved_edges)} contain duplicates")
    incident = set(g.incident(node))
    for e in moved:
        if e not in incident:
            raise GraphError(f"edge {e} is not incident to node {node}")
    new = g.num_nodes
    edges = list(g.edges)
    for e in moved:
        edges[e] = (new, g.other_end(e, node))
    if link:
        edges.append((node, new))
    weights = list(g.weights)
    weights[node] = w - new_weight
    weights.append(new_weight)
    try:
        return ClusterGraph(tuple(weights), tuple(edges))
    except GraphError as exc:
        raise GraphError(f"split of node {node} violates degree <= weight: {exc}") from exc


def split_connected(g: ClusterGraph, node: int, new_weight: int, moved_edges: Sequence[int]) -> ClusterGraph:
    """Move ``new_weight`` sites and ``moved_edges`` of ``node`` to a new node.

    The two parts must stay in the same connected component.
    """
    out = _split(g, node, new_weight, moved_edges, link=False)
    comp_of = {}
    for ci, comp in enumerate(out.components()):
        for n in comp:
            comp_of[n] = ci
    if comp_of[node] != comp_of[out.num_nodes - 1]:
        raise GraphError(f"split of node {node} disconnects its two parts")
    return out


def split_with_link(g: ClusterGraph, node: int, new_weight: int, moved_edges: Sequence[int]) -> ClusterGraph:
    """Split like :func:`split_connected` and join the two parts with a new edge.

    The node needs two unoccupied sites: ``degree + 2 <= weight``.
    """
    _check_node(g, node)
    if g.degree(node) + 2 > g.weights[node]:
        raise GraphError(
            f"split_with_link on node {node} needs two free sites: degree {g.degree(node)}, weight {g.weights[node]}"
        )
    return _split(g, node, new_weight, moved_edges, link=True)


def add_edge(g: ClusterGraph, a: int, b: int) -> ClusterGraph:
    _check_node(g, a, "a")
    _check_node(g, b, "b")
    if a == b:
        raise GraphError("add_edge needs two distinct nodes")
    return ClusterGraph(g.weights, g.edges + ((a, b),))


def remove_edge(g: ClusterGraph, edge: int) -> ClusterGraph:
    """Inverse of :func:`add_edge` (it can only raise the subleading value)."""
    if not 0 <= edge < len(g.edges):
        raise GraphError(f"edge {edge} not in graph with {len(g.edges)} edges")
    return ClusterGraph(g.weights, g.edges[:edge] + g.edges[edge + 1 :])


RULES = ("merge", "split_connected", "split_with_link", "add_edge", "remove_edge")


def rewrite(g: ClusterGraph, rule: str, args: dict) -> ClusterGraph:
    """Apply a named rule with keyword ``args``.

    ``merge``/``add_edge`` take ``a, b``; the split rules take ``node,
    new_weight, moved_edges``; ``remove_edge`` takes ``edge``.
    """
    if rule == "merge":
        return merge(g, args["a"], args["b"])
    if rule == "split_connected":
        return split_connected(g, args["node"], args["new_weight"], args.get("moved_edges", ()))
    if rule == "split_with_link":
        return split_with_link(g, args["node"], args["new_weight"], args.get("moved_edges", ()))
    if rule == "add_edge":
        return add_edge(g, args["a"], args["b"])
    if rule == "remove_edge":
        return remove_edge(g, args["edge"])
    raise GraphError(f"unknown rule {rule!r}; expected one of {RULES}")


@dataclass
class RewriteTrace:
    """Sequence of applied rules with the graph after each step."""

    start: ClusterGraph
    steps: list[dict] = field(default_factory=list)

    @property
    def graph(self) -> ClusterGraph:
        return ClusterGraph.from_dict(self.steps[-1]["graph"]) if self.steps else self.start

    def apply(self, rule: str, args: dict) -> ClusterGraph:
        out = rewrite(self.graph, rule, args)
        self.steps.append({"rule": rule, "args": dict(args), "graph": out.to_dict()})
        return out

    def to_dict(self) -> dict:
        return {"start": self.start.to_dict(), "steps": self.steps}


def replay(trace: dict) -> ClusterGraph:
    """Re-run an exported trace, checking every recorded graph."""
    g = ClusterGraph.from_dict(trace["start"])
    for i, step in enumerate(trace["steps"]):
        g = rewrite(g, step["rule"], step["args"])
        if g.to_dict() != step["graph"]:
            raise GraphError(f"trace step {i} does not reproduce its recorded graph")
    return g


# ---------------------------------------------------------------------- shapes


def _path_order(g: ClusterGraph, comp: list[int]) -> list[int] | None:
    """Nodes of a path component from its lower-index endpoint, else None."""
    comp_set = set(comp)
    edges = [e for e, (a, b) in enumerate(g.edges) if a in comp_set]
    if len(comp) == 1:
        return list(comp)
    if len(edges) != len(comp) - 1:
        return None
    deg = g.degrees()
    if any(deg[n] > 2 for n in comp):
        return None
    ends = sorted(n for n in comp if deg[n] == 1)
    order, prev, cur = [ends[0]], None, ends[0]
    while len(order) < len(comp):
        nxt = [g.other_end(e, cur) for e in g.incident(cur) if g.other_end(e, cur) != prev]
        prev, cur = cur, nxt[0]
        order.append(cur)
    return order


def _is_cycle(g: ClusterGraph, comp: list[int]) -> bool:
    comp_set = set(comp)
    n_edges = sum(1 for a, _ in g.edges if a in comp_set)
    deg = g.degrees()
    return len(comp) >= 2 and n_edges == len(comp) and all(deg[n] == 2 for n in comp)


def validate_shape(g: ClusterGraph) -> str:
    """Classify a layer graph.

    ``loops``: every component with edges is a cycle (2-cycles of parallel edges
    included) of even-weight nodes. ``brickwork_compatible_strings``: every
    component is a path whose internal nodes have even weight. ``strings``:
    paths with some odd internal node. ``none`` otherwise. Isolated nodes are
    allowed in every shape; an edgeless graph counts as brickwork-compatible
    strings.
    """
    comps = g.components()
    nontrivial = [c for c in comps if len(c) > 1]
    if nontrivial and all(_is_cycle(g, c) and all(g.weights[n] % 2 == 0 for n in c) for c in nontrivial):
        return "loops"
    orders = [_path_order(g, c) for c in comps]
    if any(o is None for o in orders):
        return "none"
    for order in orders:
        if any(g.weights[n] % 2 for n in order[1:-1]):
            return "strings"
    return "brickwork_compatible_strings"


@dataclass(frozen=True)
class OddSplit:
    """Two brickwork-compatible layers replacing one layer of strings.

    ``second`` lives on the contraction of ``first``; ``node_map[i]`` is the
    node of ``second`` that contains node ``i`` of the input.
    """

    first: ClusterGraph
    second: ClusterGraph
    node_map: tuple[int, ...]
    removed_edges: tuple[int, ...]


def split_odd_strings(g: ClusterGraph) -> OddSplit:
    """Split a layer of isolated strings into two brickwork-compatible layers.

    Strings that are already brickwork-compatible are left alone. In the others
    the odd-weight nodes are numbered 1..k from the lower-index endpoint; odd
    nodes with odd number lose their left edge and those with even number lose
    their right edge. The removed edges form the second layer.
    """
    removed: list[int] = []
    for comp in g.components():
        order = _path_order(g, comp)
        if order is None:
            raise GraphError(f"component containing node {comp[0]} is not a string")
        if not any(g.weights[n] % 2 for n in order[1:-1]):
            continue
        edge_between = {}
        for e, (a, b) in enumerate(g.edges):
            edge_between[frozenset((a, b))] = e
        odd_positions = [p for p, n in enumerate(order) if g.weights[n] % 2]
        for j, p in enumerate(odd_positions, start=1):
            if j % 2 == 1 and p > 0:
                removed.append(edge_between[frozenset((order[p - 1], order[p]))])
            elif j % 2 == 0 and p < len(order) - 1:
                removed.append(edge_between[frozenset((order[p], order[p + 1]))])
    removed = sorted(set(removed))
    kept = tuple(e for i, e in enumerate(g.edges) if i not in set(removed))
    first = ClusterGraph(g.weights, kept)
    contracted, node_map = contract(first)
    second = ClusterGraph(contracted.weights, tuple((node_map[g.edges[e][0]], node_map[g.edges[e][1]]) for e in removed))
    for layer in (first, second):
        if validate_shape(layer) != "brickwork_compatible_strings":
            raise GraphError("odd-node splitting produced a layer that is not brickwork-compatible")
    return OddSplit(first, second, tuple(node_map), tuple(removed))


# --------------------------------------------------------------- Euler reduction


def eulerian_circuit(g: ClusterGraph, start: int) -> list[tuple[int, int | None]]:
    """Hierholzer circuit from ``start`` over its component.

    Returns ``[(start, None), (v1, e1), ..., (start, eL)]`` where edge ``e_i``
    joins the previous node to ``v_i``. The lowest unused edge index is always
    taken first.
    """
    adj = [g.incident(n) for n in range(g.num_nodes)]
    used = [False] * len(g.edges)
    ptr = [0] * g.num_nodes
    stack: list[tuple[int, int | None]] = [(start, None)]
    circuit: list[tuple[int, int | None]] = []
    while stack:
        v, _ = stack[-1]
        while ptr[v] < len(adj[v]) and used[adj[v][ptr[v]]]:
            ptr[v] += 1
        if ptr[v] < len(adj[v]):
            e = adj[v][ptr[v]]
            used[e] = True
            stack.append((g.other_end(e, v), e))
        else:
            circuit.append(stack.pop())
    circuit.reverse()
    return circuit


@dataclass(frozen=True)
class EulerReduction:
    loop_sizes: tuple[int, ...]
    graph: ClusterGraph
    trace: RewriteTrace


def euler_reduce(g: ClusterGraph) -> EulerReduction:
    """Rewrite every component into a loop of weight-2 nodes.

    Nodes are split along an Eulerian circuit (one new node per extra visit,
    keeping the circuit order of edges), then nodes heavier than 2 shed
    weight-2 pieces joined by links. ``loop_sizes`` lists the total weight of
    each component that has edges, in component order.
    """
    deg = g.degrees()
    for node in range(g.num_nodes):
        if deg[node] % 2:
            raise GraphError(f"node {node} has odd degree {deg[node]}")
        if g.weights[node] % 2:
            raise GraphError(f"node {node} has odd weight {g.weights[node]}")
    trace = RewriteTrace(g)
    loop_sizes = []
    for comp in g.components():
        if len(comp) == 1:
            continue
        loop_sizes.append(sum(g.weights[n] for n in comp))
        circuit = eulerian_circuit(g, comp[0])
        edges_in = [e for _, e in circuit[1:]]
        length = len(edges_in)
        seen: set[int] = set()
        for i in range(length):
            node = circuit[i][0]
            e_in = edges_in[i - 1] if i > 0 else edges_in[-1]
            e_out = edges_in[i]
            if node not in seen:
                seen.add(node)
                continue
            trace.apply("split_connected", {"node": node, "new_weight": 2, "moved_edges": sorted([e_in, e_out])})
    current = trace.graph
    node = 0
    while node < current.num_nodes:
        while current.weights[node] > 2 and current.degree(node) > 0:
            moved = current.incident(node)[0]
            current = trace.apply("split_with_link", {"node": node, "new_weight": 2, "moved_edges": [moved]})
        node += 1
    return EulerReduction(tuple(loop_sizes), trace.graph, trace)
