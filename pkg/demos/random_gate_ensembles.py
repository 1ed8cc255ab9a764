"""Random gate locations: how many gates it takes to connect, and what that buys.

Estimates the mean number of i.i.d. gates needed to connect a path and a
complete interaction graph, then sweeps the gate count on a path and prints
the ensemble-averaged log error bound.
"""

from __future__ import annotations

import math

import numpy as np

from tdesign import search
from tdesign.architecture import complete_graph, path_graph


def main() -> None:
    rng = np.random.default_rng(0)
    stats = search.ensemble_connection_stats(path_graph(16), 2000, rng)
    print(f"path N=16: mean {stats.mean:.2f} +- {stats.std_error:.2f}, exact {search.coupon_collector_mean(15):.2f}")
    for n in (8, 16, 32):
        s = search.ensemble_connection_stats(complete_graph(n), 500, rng)
        print(f"complete N={n}: mean {s.mean:.1f}, (N/2) ln N = {n / 2 * math.log(n):.1f}")

    print("\naveraged bound on a path of 8 sites (log <E>, log eps = -4.61)")
    for row in search.threshold_curve(path_graph(8), [100, 200, 400, 800, 1600], 2, 0.01, 50, seed=3):
        print(f"  n_g={row['n_g']:>5}: log<E>={row['log_mean_error']:9.3f}  <k>={row['k_mean']:6.2f}  certified={row['certified']}")

    sampler = search.gate_sequence_sampler(path_graph(8), 1600)
    rep = search.averaged_bound_check(sampler, 2, 0.01, 50, rng, allow_conjectured=True)
    conj = rep["conjectured"]
    print(
        f"  rigorous blocks are long (mean {rep['ell_bar_mean']:.1f} layers), so the certified bound needs far more gates;"
        f" the conjectured count needs <k> >= {conj['k_threshold']:.1f}, about {conj['implied_n_g']:.0f} gates"
    )

    result = search.anneal_max_ssv(6, config=search.AnnealConfig(iterations=1000, seed=0))
    print(f"\nannealing N=6, 4 layers: best ssv {result.best_ssv:.6f}")
    for layer in result.best_arch.layers:
        print(f"  {list(layer)}")


if __name__ == "__main__":
    main()
