from __future__ import annotations

import math

import numpy as np
import pytest

from tdesign import bounds, search
from tdesign.architecture import (
    Architecture,
    ArchitectureError,
    brickwork_1d,
    complete_graph,
    greedy_block_decomposition,
    is_connected_block,
    path_graph,
)
from tdesign.spectral import subleading_singular_value, transfer_matrix


def test_anneal_config_validation():
    with pytest.raises(ValueError):
        search.AnnealConfig(cooling=1.0)
    with pytest.raises(ValueError):
        search.AnnealConfig(move_mean=0.5)
    with pytest.raises(ValueError):
        search.AnnealConfig(connectivity_policy="ignore")


@pytest.fixture(scope="module")
def anneal6():
    return search.anneal_max_ssv(6, 2, 2, config=search.AnnealConfig(iterations=300, seed=1))


def test_anneal_bounded_by_open_brickwork(anneal6):
    open_ssv = subleading_singular_value(transfer_matrix(brickwork_1d(6, "open"))).ssv
    assert anneal6.best_ssv <= open_ssv + 1e-9
    assert anneal6.best_ssv < 1 - 1e-12
    assert is_connected_block(anneal6.best_arch, 0, anneal6.best_arch.num_layers - 1)


def test_anneal_best_matches_objective(anneal6):
    assert search.objective_value(anneal6.best_arch) == pytest.approx(anneal6.best_ssv, abs=1e-12)


def test_anneal_temperature_monotone(anneal6):
    temps = [row["temperature"] for row in anneal6.trace]
    assert all(b < a for a, b in zip(temps, temps[1:]))
    assert temps[0] == anneal6.t_start


def test_anneal_records_rejections(anneal6):
    rejected = [row for row in anneal6.trace if row["rejected_disconnected"]]
    assert rejected
    assert all(row["proposal"] is None and not row["accepted"] for row in rejected)


def test_anneal_reproducible():
    cfg = search.AnnealConfig(iterations=50, seed=3)
    a = search.anneal_max_ssv(5, 2, 2, config=cfg)
    b = search.anneal_max_ssv(5, 2, 2, config=cfg)
    assert a.to_dict() == b.to_dict()


def test_anneal_penalize_policy_runs():
    res = search.anneal_max_ssv(4, 2, 2, 3, search.AnnealConfig(iterations=40, connectivity_policy="penalize", t_start=0.05))
    assert not any(row["rejected_disconnected"] for row in res.trace)
    assert res.t_start == 0.05


def test_objective_on_disconnected_block_is_one():
    arch = Architecture(4, 2, [[(0, 1), (2, 3)]])
    assert search.objective_value(arch) == pytest.approx(1.0, abs=1e-12)


def test_coupon_collector():
    assert search.coupon_collector_mean(15) == pytest.approx(49.7734, abs=1e-4)


def test_path_ensemble_mean():
    stats = search.ensemble_connection_stats(path_graph(16), 2000, np.random.default_rng(5), num_sites=16)
    assert abs(stats.mean - search.coupon_collector_mean(15)) <= 0.15 * 49.77
    assert stats.counts.min() >= 15


@pytest.mark.parametrize("n", [8, 16, 32])
def test_complete_graph_scaling(n):
    stats = search.ensemble_connection_stats(complete_graph(n), 300, np.random.default_rng(n))
    ref = n / 2 * math.log(n)
    assert ref / 2 <= stats.mean <= 2 * ref
    assert stats.counts.min() >= n - 1


def test_single_trial_reproducible():
    a = search.ensemble_connection_stats(path_graph(10), 1, np.random.default_rng(4))
    b = search.ensemble_connection_stats(path_graph(10), 1, np.random.default_rng(4))
    assert a.counts.tolist() == b.counts.tolist()


def test_ensemble_rejects_bad_graphs():
    with pytest.raises(ArchitectureError):
        search.ensemble_connection_stats([], 10, np.random.default_rng(0))
    with pytest.raises(ArchitectureError):
        search.ensemble_connection_stats([(0, 1), (2, 3)], 10, np.random.default_rng(0))


def test_fixed_gate_count_statistics():
    stats = search.ensemble_connection_stats(path_graph(8), 50, np.random.default_rng(2), n_g=200)
    summary = stats.summary()
    assert stats.k_samples.shape == (50,)
    assert summary["trials"] == 50
    assert np.all(stats.k_samples >= 1)


def test_pack_layers_keeps_order_and_disjointness():
    gates = [(0, 1), (2, 3), (1, 2), (0, 1), (3, 4)]
    layers = search.pack_layers(gates)
    flat = [g for layer in layers for g in layer]
    assert sorted(flat) == sorted(gates)
    for layer in layers:
        sites = [s for g in layer for s in g]
        assert len(sites) == len(set(sites))
    sequential = search.gate_sequence_architecture(gates, 5, layering="sequential")
    assert sequential.num_layers == 5


def test_degenerate_distribution_matches_pipeline():
    arch = brickwork_1d(6, "periodic").tiled(5)
    arch = Architecture(arch.num_sites, arch.local_dim, arch.layers, None)
    rep = search.averaged_bound_check(lambda rng: arch, 2, 0.01, 3, np.random.default_rng(0))
    pipe = bounds.bound_pipeline(arch, 2, 0.01)
    aperiodic = next(r for r in pipe.reports if r.theorem_path == "aperiodic")
    assert rep["k_star_mean"] == pytest.approx(aperiodic.k_star, rel=1e-12)
    dec = greedy_block_decomposition(arch)
    c = bounds.tightest_c(2, 2).value
    expected = bounds.error_prefactor_log(6, 2, 2) - dec.k * bounds.block_rate(c, 2)
    assert rep["log_mean_error"] == pytest.approx(expected, rel=1e-12)
    assert rep["mean_log_error"] == pytest.approx(expected, rel=1e-12)


def test_average_of_errors_dominates_mean_log():
    sampler = search.gate_sequence_sampler(path_graph(8), 120)
    rep = search.averaged_bound_check(sampler, 2, 0.01, 40, np.random.default_rng(3))
    assert rep["mean_log_error"] <= rep["log_mean_error"] + 1e-12


def test_threshold_curve_monotone():
    rows = search.threshold_curve(path_graph(8), [50, 100, 200, 400], 2, 0.01, 20, seed=1)
    errors = [r["log_mean_error"] for r in rows]
    assert all(b <= a + 1e-12 for a, b in zip(errors, errors[1:]))


def test_conjectured_threshold_consistency():
    sampler = search.gate_sequence_sampler(complete_graph(16), 400)
    rep = search.averaged_bound_check(sampler, 2, 0.01, 30, np.random.default_rng(6), allow_conjectured=True)
    conj = rep["conjectured"]
    assert conj["k_threshold"] == pytest.approx(bounds.conjectured_block_count(16, 2, 2, 0.01))
    assert conj["implied_n_g"] == pytest.approx(conj["k_threshold"] * conj["gates_per_connection"])
    assert not conj["rigorous"]
