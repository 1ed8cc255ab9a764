"""Design-depth certificates for a few architectures.

Runs the bound pipeline on periodic brickwork, an incomplete periodic
architecture and a random aperiodic circuit, and prints every applicable
bound with the tightest rigorous one marked.
"""

from __future__ import annotations

import numpy as np

from tdesign import bounds
from tdesign.architecture import Architecture, brickwork_1d, random_connected


def show(name: str, arch: Architecture, eps: float = 0.01) -> None:
    result = bounds.bound_pipeline(arch, t=2, eps=eps)
    print(f"\n{name} (N={arch.num_sites}, q={arch.local_dim}, eps={eps})")
    for r in result.reports:
        mark = "*" if r.tightest else " "
        tag = "" if r.rigorous else " (conjectured)"
        print(f" {mark} {r.theorem_path:<20} s*={r.s_star:.6f} k*={r.k_star:12.3f} depth={r.d_star}{tag}")
    for note in result.skipped:
        print(f"   skipped: {note}")


def main() -> None:
    show("periodic brickwork", brickwork_1d(8, "periodic", 2))
    staircase = Architecture(4, 4, [[(0, 1)], [(1, 2)], [(2, 3)]], 3)
    show("incomplete staircase", staircase)
    show("random complete layers", random_connected(8, 12, np.random.default_rng(1), q=2))

    print("\nclosed forms")
    print(f"  two-cluster value m=3, q=2: {bounds.two_cluster_formula(3, 2):.8f}")
    print(f"  hypercube product bound d=10, q=2: {bounds.hypercube_product_bound(10, 2):.4f}")
    print(f"  hypercube tail bound q=2: {bounds.hypercube_tail_bound(2):.4f}")
    print(f"  2D brickwork depth L=4, q=2, eps=0.01: {bounds.ddim_brickwork_bound(4, 2, 2, 0.01):.1f}")


if __name__ == "__main__":
    main()
