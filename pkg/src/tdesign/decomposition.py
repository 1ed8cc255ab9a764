"""Layer decompositions of connected cluster graphs into brickwork-compatible strings.

Both algorithms work on a spanning tree and are simulated at the level of
sites: node ``i`` owns ``weights[i]`` concrete sites, every tree edge is a gate
on one free site at each end, and every layer is a set of gates plus optional
carvings that split a cluster into parts (the split-with-link move). Each layer
is then certified as isolated strings and split into at most two
brickwork-compatible layers.

* :func:`tree_decompose` follows heavy paths recursively, absorbing the
  non-path children of each path node with sequential strings or the 4-layer
  star contraction, and closes each level with one path layer.
* :func:`loglog_decompose` contracts all heavy paths in one layer, then lets
  even-depth nodes absorb their children in rounds of at most 4 layers.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

from tdesign.cluster_graph import ClusterGraph, GraphError, split_odd_strings, validate_shape


def tree_layer_bound(max_degree: int, num_nodes: int) -> int:
    """Ceiling ``2 min(ceil(d/2), 6) ceil(log2 N)`` for :func:`tree_decompose`."""
    if num_nodes <= 1:
        return 0
    return 2 * min(math.ceil(max_degree / 2), 6) * math.ceil(math.log2(num_nodes))


def loglog_layer_bound(num_nodes: int) -> int:
    """Ceiling ``8 ceil(log2 floor(log2(N+1))) + 2`` for :func:`loglog_decompose`."""
    inner = math.floor(math.log2(num_nodes + 1))
    return 8 * math.ceil(math.log2(inner)) + 2 if inner >= 1 else 2


@dataclass(frozen=True)
class LayerStep:
    """One emitted layer: its cluster graph and the sites of every node."""

    graph: ClusterGraph
    clusters: tuple[tuple[int, ...], ...]
    certificate: str
    phase: str

    def contracted(self) -> list[frozenset[int]]:
        return [frozenset(s for n in comp for s in self.clusters[n]) for comp in self.graph.components()]

    def to_dict(self) -> dict:
        return {
            "phase": self.phase,
            "certificate": self.certificate,
            "graph": self.graph.to_dict(),
            "clusters": [list(c) for c in self.clusters],
        }


@dataclass(frozen=True)
class LayerDecomposition:
    method: str
    source: ClusterGraph
    steps: tuple[LayerStep, ...]
    tree_edges: tuple[int, ...]
    dropped_edges: tuple[int, ...]
    string_layers: int
    bound: int
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def num_layers(self) -> int:
        return len(self.steps)

    @property
    def certificates(self) -> list[str]:
        return [s.certificate for s in self.steps]

    def initial_clusters(self) -> list[frozenset[int]]:
        out, offset = [], 0
        for w in self.source.weights:
            out.append(frozenset(range(offset, offset + w)))
            offset += w
        return out

    def verify_contraction(self) -> bool:
        """Check that the layers compose to a single cluster.

        Every layer's clusters must partition all sites, refine the clusters
        left by the previous layer (splits only refine), and carry weights equal
        to their site counts. Contracting the last layer must leave one cluster.
        """
        previous = self.initial_clusters()
        all_sites = frozenset().union(*previous) if previous else frozenset()
        for step in self.steps:
            clusters = [frozenset(c) for c in step.clusters]
            if sum(len(c) for c in clusters) != len(all_sites) or frozenset().union(*clusters) != all_sites:
                return False
            if any(len(c) != w for c, w in zip(clusters, step.graph.weights)):
                return False
            owner = {s: i for i, c in enumerate(previous) for s in c}
            if any(len({owner[s] for s in c}) != 1 for c in clusters):
                return False
            previous = step.contracted()
        return len(previous) == 1

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "source": self.source.to_dict(),
            "num_layers": self.num_layers,
            "string_layers": self.string_layers,
            "bound": self.bound,
            "tree_edges": list(self.tree_edges),
            "dropped_edges": [{"rule": "add_edge", "direction": "reverse", "edge": e} for e in self.dropped_edges],
            "contraction_verified": self.verify_contraction(),
            "layers": [s.to_dict() for s in self.steps],
            **self.meta,
        }


# ------------------------------------------------------------------ tree set-up


@dataclass
class _Tree:
    graph: ClusterGraph
    tree_edges: list[int]
    dropped: list[int]
    sites: list[list[int]]
    gate_site: dict[tuple[int, int], int]
    neighbors: list[list[tuple[int, int]]]

    def max_degree(self) -> int:
        return max((len(n) for n in self.neighbors), default=0)

    def rooted(self, root: int) -> tuple[list[int | None], list[list[int]], list[int]]:
        """Parent, ordered children and subtree node counts for ``root``."""
        n = self.graph.num_nodes
        parent: list[int | None] = [None] * n
        children: list[list[int]] = [[] for _ in range(n)]
        order = [root]
        seen = {root}
        for v in order:
            for u, _ in sorted(self.neighbors[v]):
                if u not in seen:
                    seen.add(u)
                    parent[u] = v
                    children[v].append(u)
                    order.append(u)
        size = [1] * n
        for v in reversed(order):
            if parent[v] is not None:
                size[parent[v]] += size[v]
        return parent, children, size

    def edge_between(self, a: int, b: int) -> int:
        for u, e in self.neighbors[a]:
            if u == b:
                return e
        raise GraphError(f"no tree edge between {a} and {b}")

    def gate(self, a: int, b: int) -> tuple[int, int]:
        """Sites of the tree edge ``a``-``b``, ``a``'s site first."""
        e = self.edge_between(a, b)
        return self.gate_site[(e, a)], self.gate_site[(e, b)]


def _spanning_tree(g: ClusterGraph) -> _Tree:
    """Breadth-first spanning tree from node 0 with concrete sites per edge."""
    if g.num_nodes == 0:
        raise GraphError("empty graph")
    if not g.is_connected():
        raise GraphError("decomposition needs a connected graph")
    adj = [g.incident(n) for n in range(g.num_nodes)]
    seen = {0}
    queue = deque([0])
    tree: list[int] = []
    while queue:
        v = queue.popleft()
        for e in adj[v]:
            u = g.other_end(e, v)
            if u not in seen:
                seen.add(u)
                tree.append(e)
                queue.append(u)
    tree.sort()
    tree_set = set(tree)
    dropped = [e for e in range(len(g.edges)) if e not in tree_set]
    sites, offset = [], 0
    for w in g.weights:
        sites.append(list(range(offset, offset + w)))
        offset += w
    used = [0] * g.num_nodes
    gate_site: dict[tuple[int, int], int] = {}
    neighbors: list[list[tuple[int, int]]] = [[] for _ in range(g.num_nodes)]
    for e in tree:
        for node in g.edges[e]:
            gate_site[(e, node)] = sites[node][used[node]]
            used[node] += 1
        a, b = g.edges[e]
        neighbors[a].append((b, e))
        neighbors[b].append((a, e))
    return _Tree(g, tree, dropped, sites, gate_site, neighbors)


# ------------------------------------------------------------------- layer plans


@dataclass
class _Plan:
    gates: list[tuple[int, int]] = field(default_factory=list)
    carves: list[frozenset[int]] = field(default_factory=list)
    phases: list[str] = field(default_factory=list)


def _zip_plans(plan_lists: Iterable[list[_Plan]]) -> list[_Plan]:
    out: list[_Plan] = []
    for plans in plan_lists:
        for i, p in enumerate(plans):
            if i == len(out):
                out.append(_Plan())
            out[i].gates.extend(p.gates)
            out[i].carves.extend(p.carves)
            for ph in p.phases:
                if ph not in out[i].phases:
                    out[i].phases.append(ph)
    return out


Kid = tuple[frozenset[int], tuple[int, int]]


def _star_half(center: frozenset[int], kids: list[Kid]) -> list[_Plan]:
    """Absorb ``kids`` into ``center`` in two layers via a split into a string.

    The center is carved into parts ``P_1..P_m`` that each hold the center-side
    sites of two kids plus link sites; the rest ``R`` stays behind. Layer one
    contracts every ``B - P_j - B`` string; layer two joins ``R - P_1 - ... - P_m``.
    """
    child_sites = [gate[0] for _, gate in kids]
    groups = [kids[i : i + 2] for i in range(0, len(kids), 2)]
    m = len(groups)
    free = sorted(center - set(child_sites))
    with_rest = len(free) > 2 * (m - 1) + 1
    needed = 2 * (m - 1) + (1 if with_rest else 0)
    if len(free) < needed:
        raise GraphError(f"center with {len(center)} sites cannot host a star split of {len(kids)} children")
    links = iter(free[:needed])
    parts: list[set[int]] = []
    left: list[int | None] = []
    right: list[int | None] = []
    for j, group in enumerate(groups):
        part = {gate[0] for _, gate in group}
        lsite = next(links) if (j > 0 or with_rest) else None
        rsite = next(links) if j < m - 1 else None
        for s in (lsite, rsite):
            if s is not None:
                part.add(s)
        parts.append(part)
        left.append(lsite)
        right.append(rsite)
    if not with_rest:
        parts[0].update(free[needed:])
    first = _Plan([gate for _, gate in kids], [frozenset(p) for p in parts], ["star_split"])
    link_gates = []
    if with_rest:
        rest = sorted(center - set().union(*parts))
        link_gates.append((rest[0], left[0]))
    for j in range(m - 1):
        link_gates.append((right[j], left[j + 1]))
    second = _Plan(link_gates, [], ["star_join"])
    return [first, second]


def _star_plans(center: frozenset[int], kids: list[Kid]) -> tuple[list[_Plan], frozenset[int]]:
    """Absorb all ``kids`` into ``center``; returns plans and the merged sites."""
    merged = center.union(*(k[0] for k in kids)) if kids else center
    g = len(kids)
    if g == 0:
        return [], merged
    if math.ceil(g / 2) <= 4:
        plans = [_Plan([gate for _, gate in kids[i : i + 2]], [], ["star_sequential"]) for i in range(0, g, 2)]
        return plans, merged
    half = g // 2
    plans = _star_half(center, kids[:half])
    grown = center.union(*(k[0] for k in kids[:half]))
    plans += _star_half(grown, kids[half:])
    return plans, merged


def _heavy_child(children: list[int], size: list[int]) -> int:
    return min(children, key=lambda c: (-size[c], c))


def _plan_tree(tree: _Tree, root: int, children: list[list[int]], size: list[int]) -> tuple[list[_Plan], frozenset[int]]:
    path = [root]
    while children[path[-1]]:
        path.append(_heavy_child(children[path[-1]], size))
    on_path = set(path)
    off_path = {c: [ch for ch in children[c] if ch not in on_path] for c in path}
    extra = off_path[root].pop(0) if off_path[root] else None
    sub: dict[int, tuple[list[_Plan], frozenset[int]]] = {}
    for c in path:
        for b in off_path[c] + ([extra] if c == root and extra is not None else []):
            sub[b] = _plan_tree(tree, b, children, size)
    plans = _zip_plans(p for p, _ in sub.values())
    star_lists = []
    merged_sites = []
    for c in path:
        kids = [(sub[b][1], tree.gate(c, b)) for b in off_path[c]]
        star, merged = _star_plans(frozenset(tree.sites[c]), kids)
        star_lists.append(star)
        merged_sites.append(merged)
    plans += _zip_plans(star_lists)
    gates = [tree.gate(path[i], path[i + 1]) for i in range(len(path) - 1)]
    if extra is not None:
        gates.append(tree.gate(root, extra))
        merged_sites.append(sub[extra][1])
    if gates:
        plans.append(_Plan(gates, [], ["path"]))
    return plans, frozenset().union(*merged_sites)


# --------------------------------------------------------------------- execution


def _execute(tree: _Tree, plans: list[_Plan]) -> tuple[list[LayerStep], int]:
    """Run plans on the site partition; emit brickwork-compatible layers."""
    cluster_of: dict[int, int] = {}
    members: dict[int, set[int]] = {}
    for node, sites in enumerate(tree.sites):
        members[node] = set(sites)
        for s in sites:
            cluster_of[s] = node
    next_id = len(tree.sites)
    steps: list[LayerStep] = []
    string_layers = 0
    for li, plan in enumerate(plans):
        for part in plan.carves:
            owners = {cluster_of[s] for s in part}
            if len(owners) != 1:
                raise GraphError(f"layer {li}: carved part spans several clusters")
            owner = owners.pop()
            if part == members[owner]:
                continue
            members[owner] -= part
            members[next_id] = set(part)
            for s in part:
                cluster_of[s] = next_id
            next_id += 1
        ids = sorted(members, key=lambda c: min(members[c]))
        index = {cid: i for i, cid in enumerate(ids)}
        clusters = tuple(tuple(sorted(members[c])) for c in ids)
        edges = []
        for a, b in plan.gates:
            ca, cb = cluster_of[a], cluster_of[b]
            if ca == cb:
                raise GraphError(f"layer {li}: gate ({a}, {b}) is internal to a cluster")
            edges.append((index[ca], index[cb]))
        graph = ClusterGraph(tuple(len(c) for c in clusters), tuple(edges))
        shape = validate_shape(graph)
        if shape not in ("strings", "brickwork_compatible_strings"):
            raise GraphError(f"layer {li} is not a layer of isolated strings ({shape})")
        string_layers += 1
        phase = "+".join(plan.phases)
        split = split_odd_strings(graph)
        steps.append(LayerStep(split.first, clusters, validate_shape(split.first), phase))
        if split.second.edges:
            merged = [[] for _ in split.second.weights]
            for node, target in enumerate(split.node_map):
                merged[target].extend(clusters[node])
            merged_clusters = tuple(tuple(sorted(c)) for c in merged)
            steps.append(LayerStep(split.second, merged_clusters, validate_shape(split.second), phase + ":odd_split"))
        for a, b in plan.gates:
            ca, cb = cluster_of[a], cluster_of[b]
            if ca == cb:
                continue
            keep, drop = (ca, cb) if min(members[ca]) < min(members[cb]) else (cb, ca)
            for s in members[drop]:
                cluster_of[s] = keep
            members[keep] |= members.pop(drop)
    return steps, string_layers


# ------------------------------------------------------------------ algorithms


def tree_decompose(g: ClusterGraph) -> LayerDecomposition:
    """Recursive heavy-path decomposition with star contractions.

    The spanning tree is rooted at node 0. Each level contracts the subtrees
    hanging off the heavy path (recursively, in parallel), absorbs them into
    their path nodes, and joins the path in one layer; one child of the root is
    attached to the front of the path string instead of being absorbed.
    """
    tree = _spanning_tree(g)
    _, children, size = tree.rooted(0)
    plans, _ = _plan_tree(tree, 0, children, size)
    steps, string_layers = _execute(tree, plans)
    bound = tree_layer_bound(tree.max_degree(), g.num_nodes)
    meta = {"max_tree_degree": tree.max_degree(), "root": 0}
    return LayerDecomposition(
        "tree", g, tuple(steps), tuple(tree.tree_edges), tuple(tree.dropped), string_layers, bound, meta
    )


def heavy_paths(children: list[list[int]], size: list[int], root: int) -> list[list[int]]:
    """Partition a rooted tree into maximally weighted root-to-leaf paths."""
    paths = []
    heads = [root]
    while heads:
        head = heads.pop(0)
        path = [head]
        while children[path[-1]]:
            heavy = _heavy_child(children[path[-1]], size)
            heads.extend(c for c in children[path[-1]] if c != heavy)
            path.append(heavy)
        paths.append(path)
    return paths


def _loglog_root(g: ClusterGraph) -> int:
    return min(range(g.num_nodes), key=lambda n: (-g.weights[n], n))


def heavy_path_tree_height(g: ClusterGraph) -> int:
    """Height of the tree left after contracting all heavy paths."""
    tree = _spanning_tree(g)
    parent, children, size = tree.rooted(_loglog_root(g))
    paths = heavy_paths(children, size, _loglog_root(g))
    path_of = {v: i for i, p in enumerate(paths) for v in p}
    depth = [0] * len(paths)
    for i, p in enumerate(paths):
        up = parent[p[0]]
        depth[i] = depth[path_of[up]] + 1 if up is not None else 0
    return max(depth)


def loglog_decompose(g: ClusterGraph) -> LayerDecomposition:
    """Heavy paths in one layer, then rounds of even-depth star contractions.

    The root is the node of largest weight (lowest index on ties). Each round
    takes the contracted tree of height ``h`` to height ``floor(h/2)`` in at
    most 4 layers of isolated strings.
    """
    tree = _spanning_tree(g)
    root = _loglog_root(g)
    parent, children, size = tree.rooted(root)
    paths = heavy_paths(children, size, root)
    plans: list[_Plan] = []
    path_gates = [tree.gate(p[i], p[i + 1]) for p in paths for i in range(len(p) - 1)]
    if path_gates:
        plans.append(_Plan(path_gates, [], ["heavy_paths"]))
    path_of = {v: i for i, p in enumerate(paths) for v in p}
    sites = [frozenset(s for v in p for s in tree.sites[v]) for p in paths]
    kids: list[list[tuple[int, tuple[int, int]]]] = [[] for _ in paths]
    up: list[int | None] = [None] * len(paths)
    for i, p in enumerate(paths):
        par = parent[p[0]]
        if par is not None:
            up[i] = path_of[par]
            kids[path_of[par]].append((i, tree.gate(par, p[0])))
    height = 0
    depth = {path_of[root]: 0}
    for i in range(len(paths)):
        if up[i] is not None:
            depth[i] = depth[up[i]] + 1
        height = max(height, depth[i])
    rounds = 0
    # merged clusters keep the path index of their even-depth center
    live_nodes = set(range(len(paths)))
    while len(live_nodes) > 1:
        rounds += 1
        depth = {path_of[root]: 0}
        order = [path_of[root]]
        for v in order:
            for c, _ in kids[v]:
                depth[c] = depth[v] + 1
                order.append(c)
        star_lists = []
        new_kids: dict[int, list[tuple[int, tuple[int, int]]]] = {}
        new_sites: dict[int, frozenset[int]] = {}
        for v in order:
            if depth[v] % 2:
                continue
            absorbed = [(sites[c], gate) for c, gate in kids[v]]
            star, merged = _star_plans(sites[v], absorbed)
            star_lists.append(star)
            new_sites[v] = merged
            new_kids[v] = [gk for c, _ in kids[v] for gk in kids[c]]
        plans += _zip_plans(star_lists)
        live_nodes = set(new_sites)
        for v in live_nodes:
            sites[v] = new_sites[v]
            kids[v] = new_kids[v]
    steps, string_layers = _execute(tree, plans)
    meta = {"root": root, "path_tree_height": height, "rounds": rounds}
    return LayerDecomposition(
        "loglog",
        g,
        tuple(steps),
        tuple(tree.tree_edges),
        tuple(tree.dropped),
        string_layers,
        loglog_layer_bound(g.num_nodes),
        meta,
    )
