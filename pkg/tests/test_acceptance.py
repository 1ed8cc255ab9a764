"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the status lines are written
straight to the terminal.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
import pytest

from graph_samples import random_cluster_graph, random_even_graph
from tdesign import bounds, perm_core, search
from tdesign.architecture import Architecture, brickwork_1d, path_graph, random_connected
from tdesign.cluster_graph import (
    ClusterGraph,
    GraphError,
    add_edge,
    euler_reduce,
    merge,
    split_connected,
    split_with_link,
    validate_shape,
)
from tdesign.decomposition import loglog_decompose, loglog_layer_bound, tree_decompose, tree_layer_bound
from tdesign.spectral import (
    frame_potential_exact,
    frame_potential_mc,
    gate_label_action,
    gate_projector,
    layer_gap_bound,
    layer_restricted_ssv,
    singular_values,
    subleading_singular_value,
    transfer_matrix,
)


@pytest.fixture
def report(capsys):
    """Print one status line to the terminal, then assert."""

    def emit(criterion: int, ok: bool, detail: str, soft: bool = False) -> None:
        status = "PASS" if ok else ("CANDIDATE" if soft else "FAIL")
        with capsys.disabled():
            print(f"\n[{status}] criterion {criterion}: {detail}")
        assert ok or soft, detail

    return emit


def _ssv(arch: Architecture, layer_range=None, method: str = "dense") -> float:
    return subleading_singular_value(transfer_matrix(arch, layer_range), method).ssv


def test_01_gate_action_on_mixed_label(report):
    action = gate_label_action(2, 2, 2.0)
    col = action[:, 0 * 2 + 1]
    expected = np.zeros(4)
    expected[[0, 3]] = 0.4
    err_label = float(np.abs(col - expected).max())

    coords = perm_core.ortho_frame(2, 2.0).coords
    ident, swap = coords[:, 0], coords[:, 1]
    image = gate_projector(2, 2, 2.0).matvec(np.kron(ident, swap))
    target = 0.4 * (np.kron(ident, ident) + np.kron(swap, swap))
    err_frame = float(np.abs(image - target).max())

    ok = err_label <= 1e-12 and err_frame <= 1e-12
    report(1, ok, f"(I,S) -> 2/5[(I,I)+(S,S)], label err {err_label:.1e}, frame err {err_frame:.1e}")


PINNED_PERIODIC = {
    (4, 2): 0.32,
    (6, 2): 0.48,
    (8, 2): 0.546274,
    (4, 3): 0.18,
    (6, 3): 0.27,
    (8, 3): 0.307279,
}


def test_02_periodic_brickwork_gap(report):
    rows, ok = [], True
    for (n, q), pinned in PINNED_PERIODIC.items():
        s = _ssv(brickwork_1d(n, "periodic", q))
        cap = (2 * q / (q * q + 1)) ** 2
        ok &= s <= cap + 1e-9 and abs(s - pinned) <= 1e-6
        rows.append(f"N={n},q={q}:{s:.6f}<={cap:.4f}")
    report(2, ok, "; ".join(rows))


def test_03_open_versus_periodic(report):
    rows, ok = [], True
    for n in (4, 6, 8):
        periodic = _ssv(brickwork_1d(n, "periodic", 2))
        opened = _ssv(brickwork_1d(n, "open", 2))
        ok &= periodic <= opened + 1e-9 and opened <= 0.8 + 1e-9
        rows.append(f"N={n}: periodic {periodic:.6f} <= open {opened:.6f} <= 0.8")
    report(3, ok, "; ".join(rows))


def test_04_layer_product_bound(report):
    rng = np.random.default_rng(2024)
    worst = -math.inf
    for _ in range(50):
        n = int(rng.choice([4, 6, 8]))
        arch = random_connected(n, int(rng.integers(2, 5)), rng, q=2)
        s = _ssv(arch, (0, arch.num_layers - 1))
        bound = layer_gap_bound(arch, 2)["bound"]
        worst = max(worst, s * s - bound)
    report(4, worst <= 1e-9, f"50 architectures, max ssv^2 - bound = {worst:.3e}")


def _split_candidates(g: ClusterGraph, rng: np.random.Generator, link: bool) -> ClusterGraph | None:
    rule = split_with_link if link else split_connected
    for node in rng.permutation(g.num_nodes):
        node = int(node)
        w = g.weights[node]
        if w < 2:
            continue
        inc = g.incident(node)
        for _ in range(6):
            moved = [e for e in inc if rng.random() < 0.5]
            try:
                return rule(g, node, int(rng.integers(1, w)), moved)
            except GraphError:
                continue
    return None


def test_05_rewrite_monotonicity(report):
    rng = np.random.default_rng(7)
    counts = {"merge": 0, "add_edge": 0, "split_connected": 0, "split_with_link": 0, "euler": 0}
    worst = -math.inf

    def ssv(g: ClusterGraph) -> float:
        return layer_restricted_ssv(g, 2, 2.0) if g.edges else 0.0

    for i in range(100):
        g = random_even_graph(rng) if i % 4 == 0 else random_cluster_graph(rng)
        base = ssv(g)
        a, b = g.edges[int(rng.integers(len(g.edges)))]
        worst = max(worst, ssv(merge(g, a, b)) - base)
        counts["merge"] += 1
        free = [n for n in range(g.num_nodes) if g.degree(n) < g.weights[n]]
        if len(free) >= 2:
            x, y = (int(v) for v in rng.choice(free, 2, replace=False))
            worst = max(worst, ssv(add_edge(g, x, y)) - base)
            counts["add_edge"] += 1
        for link in (False, True):
            split = _split_candidates(g, rng, link)
            if split is not None:
                worst = max(worst, base - ssv(split))
                counts["split_with_link" if link else "split_connected"] += 1
        if all(d % 2 == 0 for d in g.degrees()) and all(w % 2 == 0 for w in g.weights):
            worst = max(worst, base - ssv(euler_reduce(g).graph))
            counts["euler"] += 1
    ok = worst <= 1e-9 and all(counts.values())
    report(5, ok, f"100 graphs, checks {counts}, max violation {worst:.3e}")


def test_06_two_cluster_formula(report):
    formula = bounds.two_cluster_formula(3, 2)
    direct = layer_restricted_ssv(ClusterGraph((4, 4), ((0, 1),) * 4), 2, 2.0)
    square = bounds.square_value(2)
    ok = abs(formula - direct) <= 1e-8 and abs(square - 2 * 4 / 25) <= 1e-15
    report(6, ok, f"formula {formula:.12f} vs direct {direct:.12f}; square {square!r}")


def test_07_frame_potential(report):
    rng = np.random.default_rng(11)
    single = Architecture(2, 2, [[(0, 1)]], 1)
    exact_single = frame_potential_exact(single, 1, 2)
    mc_single = frame_potential_mc(single, 1, 2, 10_000, rng)
    ok = abs(exact_single - 2.0) <= 1e-10
    ok &= abs(mc_single["estimate"] - exact_single) <= 3 * mc_single["std_error"]
    rows = [f"N=2 exact {exact_single:.6f}, mc {mc_single['estimate']:.4f}+-{mc_single['std_error']:.4f}"]
    arch = brickwork_1d(4, "periodic", 2)
    for k in (1, 2, 3):
        exact = frame_potential_exact(arch, k, 2)
        mc = frame_potential_mc(arch, k, 2, 10_000, rng)
        ok &= abs(mc["estimate"] - exact) <= 3 * mc["std_error"]
        rows.append(f"brickwork k={k} exact {exact:.5f}, mc {mc['estimate']:.4f}+-{mc['std_error']:.4f}")
    report(7, ok, "; ".join(rows))


def test_08_frobenius_bound(report):
    arch = brickwork_1d(4, "periodic", 2)
    op = transfer_matrix(arch)
    s = subleading_singular_value(op, "dense").ssv
    rank = int(np.sum(singular_values(op) > 1e-10))
    worst = -math.inf
    for k in range(1, 6):
        f = frame_potential_exact(arch, k, 2)
        worst = max(worst, f - (2 + (rank - 2) * s ** (2 * k)))
    report(8, worst <= 1e-6, f"rank {rank}, ssv {s:.4f}, max F(k) - bound over k<=5 = {worst:.3e}")


def _random_tree(rng: np.random.Generator, n: int, max_degree: int) -> ClusterGraph:
    deg = [0] * n
    edges = []
    for v in range(1, n):
        open_nodes = [u for u in range(v) if deg[u] < max_degree]
        u = int(rng.choice(open_nodes))
        edges.append((u, v))
        deg[u] += 1
        deg[v] += 1
    weights = [max(1, d + int(rng.integers(0, 3))) for d in deg]
    return ClusterGraph(tuple(weights), tuple(edges))


def test_09_tree_decompositions(report):
    rng = np.random.default_rng(9)
    failures = []
    for i in range(200):
        n = int(rng.integers(2, 65))
        tree = _random_tree(rng, n, int(rng.integers(2, 9)))
        d = max(tree.degrees())
        for name, dec, cap in (
            ("tree", tree_decompose(tree), tree_layer_bound(d, n)),
            ("loglog", loglog_decompose(tree), loglog_layer_bound(n)),
        ):
            shapes_ok = all(s == "brickwork_compatible_strings" for s in dec.certificates)
            shapes_ok &= all(validate_shape(step.graph) == "brickwork_compatible_strings" for step in dec.steps)
            if dec.num_layers > cap or not shapes_ok or not dec.verify_contraction():
                failures.append(f"tree {i} ({name}): {dec.num_layers} layers vs cap {cap}")
    report(9, not failures, f"200 trees, failures: {failures[:3] or 'none'}")


def test_10_site_splitting(report):
    coarse = brickwork_1d(4, "periodic", 4)

    def twin(gate):
        return tuple(s for site in gate for s in (2 * site, 2 * site + 1))

    fine = Architecture(8, 2, [[twin(g) for g in layer] for layer in coarse.layers], coarse.periodic_depth)
    a = singular_values(transfer_matrix(coarse))
    b = singular_values(transfer_matrix(fine))
    a, b = a[a > 1e-10], b[b > 1e-10]
    ok = a.shape == b.shape and float(np.abs(a - b).max()) <= 1e-8
    report(10, ok, f"q=4 block {np.round(a, 10).tolist()} vs doubled q=2 block {np.round(b, 10).tolist()}")


def test_11_bound_formulas(report):
    k = bounds.k_star(4, 2, 2, 0.01, 0.64)
    x = bounds.x_expansion(15)
    conj = bounds.conjectured_block_count(10, 2, 2, 1e-3)
    s = bounds.s_star_periodic(1 / (4 * math.log(5 / 4)), 2)
    ok = abs(k - 35.17) <= 0.01 and x == 18 and abs(conj - 77.6) <= 0.1 and math.ceil(conj) == 78
    ok &= abs(s - 0.64) <= 1e-12
    report(11, ok, f"k*={k:.4f}, x(15)={x}, conjectured={conj:.3f} -> {math.ceil(conj)}, s*={s!r}")


def test_12_ensemble_path(report):
    stats = search.ensemble_connection_stats(path_graph(16), 2000, np.random.default_rng(12), num_sites=16)
    target = search.coupon_collector_mean(15)
    ok = abs(stats.mean - 49.77) <= 0.15 * 49.77
    report(12, ok, f"mean {stats.mean:.2f} (+-{stats.std_error:.2f}) vs 15*H_15 = {target:.2f}")


@pytest.mark.slow
def test_13_annealing_evidence(report):
    candidates, rows = [], []
    for n in (5, 6):
        open_ssv = _ssv(brickwork_1d(n, "open", 2))
        for seed in range(3):
            result = search.anneal_max_ssv(n, 2, 2, config=search.AnnealConfig(iterations=2000, seed=seed))
            rows.append(f"N={n} seed={seed}: {result.best_ssv:.6f} (open {open_ssv:.6f})")
            if result.best_ssv > open_ssv + 1e-6:
                candidates.append((n, seed, result.best_ssv, result.best_arch))
    for n, seed, value, arch in candidates:
        warnings.warn(f"counterexample candidate N={n} seed={seed}: ssv {value} layers {arch.layers}")
    line = "; ".join(rows) + (f"; {len(candidates)} counterexample candidates" if candidates else "")
    report(13, not candidates, line, soft=True)
