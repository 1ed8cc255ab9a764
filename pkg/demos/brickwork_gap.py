"""Spectral gap of 1D brickwork circuits versus the closed-form values.

Prints the subleading singular value of one brickwork period for periodic and
open boundaries, the bound ``(2q/(q^2+1))^2`` for periodic rings, and the
frame potential converging to ``t! = 2``.
"""

from __future__ import annotations

from tdesign.architecture import brickwork_1d
from tdesign.spectral import frame_potential_exact, subleading_singular_value, transfer_matrix


def ssv(n: int, bc: str, q: int) -> float:
    return subleading_singular_value(transfer_matrix(brickwork_1d(n, bc, q))).ssv


def main() -> None:
    print(f"{'q':>2} {'N':>3} {'periodic':>10} {'open':>10} {'cap':>8}")
    for q in (2, 3):
        cap = (2 * q / (q * q + 1)) ** 2
        for n in (4, 6, 8):
            print(f"{q:>2} {n:>3} {ssv(n, 'periodic', q):>10.6f} {ssv(n, 'open', q):>10.6f} {cap:>8.4f}")

    arch = brickwork_1d(4, "periodic", 2)
    print("\nframe potential of k brickwork periods, N=4, q=2, t=2")
    for k in range(1, 7):
        print(f"  k={k}: {frame_potential_exact(arch, k, 2):.8f}")


if __name__ == "__main__":
    main()
