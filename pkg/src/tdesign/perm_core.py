"""Symmetric-group algebra and the metric on permutation states.

The permutation states of ``t`` copies span a ``t!``-dimensional space per site.
Their overlaps depend only on the cycle count of ``sigma tau^-1``; for a site of
(possibly non-integer) dimension ``r`` we use the unit-diagonal normalization

    <sigma|tau>_r = r ** (cycles(sigma tau^-1) - t)

Everything here is indexed by permutations in lexicographic order of their
one-line notation, so ``permutations(t)[0]`` is the identity.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

DEFAULT_CUTOFF = 1e-12


@dataclass(frozen=True)
class Permutation:
    """A bijection on ``{0, ..., t-1}`` stored in one-line notation."""

    mapping: tuple[int, ...]

    def __post_init__(self) -> None:
        if sorted(self.mapping) != list(range(len(self.mapping))):
            raise ValueError(f"not a bijection on 0..{len(self.mapping) - 1}: {self.mapping}")

    @property
    def t(self) -> int:
        return len(self.mapping)

    @classmethod
    def identity(cls, t: int) -> Permutation:
        return cls(tuple(range(t)))

    @classmethod
    def swap(cls, t: int, i: int, j: int) -> Permutation:
        m = list(range(t))
        m[i], m[j] = m[j], m[i]
        return cls(tuple(m))

    def __call__(self, i: int) -> int:
        return self.mapping[i]

    def compose(self, other: Permutation) -> Permutation:
        """Return ``self o other``, i.e. ``i -> self(other(i))``."""
        if other.t != self.t:
            raise ValueError(f"cannot compose permutations of {self.t} and {other.t} elements")
        return Permutation(tuple(self.mapping[j] for j in other.mapping))

    __matmul__ = compose

    def inverse(self) -> Permutation:
        inv = [0] * self.t
        for i, j in enumerate(self.mapping):
            inv[j] = i
        return Permutation(tuple(inv))

    def cycle_count(self) -> int:
        """Number of disjoint cycles, fixed points included."""
        seen = [False] * self.t
        cycles = 0
        for start in range(self.t):
            if seen[start]:
                continue
            cycles += 1
            j = start
            while not seen[j]:
                seen[j] = True
                j = self.mapping[j]
        return cycles


def permutation_algebra(p: Permutation, q: Permutation) -> dict:
    """Composition, inverse and cycle count in one call.

    Returns a dict with keys ``compose`` (``p o q``), ``inverse`` (of ``p``) and
    ``cycle_count`` (of ``p``).
    """
    if p.t != q.t:
        raise ValueError(f"mismatched copy counts: {p.t} != {q.t}")
    return {"compose": p.compose(q), "inverse": p.inverse(), "cycle_count": p.cycle_count()}


@lru_cache(maxsize=None)
def permutations(t: int) -> tuple[Permutation, ...]:
    """All of S_t in lexicographic order of one-line notation."""
    if t < 1:
        raise ValueError(f"t must be a positive integer, got {t}")
    return tuple(Permutation(p) for p in itertools.permutations(range(t)))


@lru_cache(maxsize=None)
def cycle_table(t: int) -> np.ndarray:
    """Integer matrix ``c[i, j] = cycles(perm_i perm_j^-1)``."""
    perms = permutations(t)
    inverses = [p.inverse() for p in perms]
    n = len(perms)
    table = np.empty((n, n), dtype=np.int64)
    for i, p in enumerate(perms):
        for j, qinv in enumerate(inverses):
            table[i, j] = p.compose(qinv).cycle_count()
    return table


def _check_r(r: float) -> float:
    r = float(r)
    if not r > 1.0:
        raise ValueError(f"virtual local dimension must exceed 1, got {r}")
    return r


def gram(t: int, r: float) -> np.ndarray:
    """Overlap matrix of single-site permutation states of dimension ``r``."""
    r = _check_r(r)
    return r ** (cycle_table(t) - t).astype(float)


def weingarten(t: int, r: float) -> np.ndarray:
    """Moore-Penrose pseudoinverse of :func:`gram`.

    The Gram matrix is symmetric, so the pseudoinverse is formed from its
    eigendecomposition. Eigenvalues of magnitude below ``DEFAULT_CUTOFF`` times
    the spectral radius are treated as zero; negative eigenvalues of an
    indefinite metric are inverted like positive ones.
    """
    g = gram(t, r)
    evals, evecs = np.linalg.eigh(g)
    keep = np.abs(evals) > DEFAULT_CUTOFF * max(1.0, np.abs(evals).max())
    inv = np.zeros_like(evals)
    inv[keep] = 1.0 / evals[keep]
    return (evecs * inv) @ evecs.T


def gram_rank(t: int, r: float, cutoff: float = DEFAULT_CUTOFF) -> int:
    """Number of Gram eigenvalues above ``cutoff`` (the positive support)."""
    evals = np.linalg.eigvalsh(gram(t, r))
    return int(np.count_nonzero(evals > cutoff))


@dataclass(frozen=True, eq=False)
class OrthoFrame:
    """Orthonormal basis of the support of the single-site metric.

    ``iso_to_ortho`` has one row per orthonormal basis vector, written in label
    coordinates, so ``iso_to_ortho @ G @ iso_to_ortho.T`` is the identity.
    ``coords`` maps label coordinates to orthonormal coordinates.
    """

    t: int
    r: float
    cutoff: float
    iso_to_ortho: np.ndarray
    coords: np.ndarray
    indefinite: bool

    @property
    def rank(self) -> int:
        return self.iso_to_ortho.shape[0]

    @property
    def label_dim(self) -> int:
        return self.iso_to_ortho.shape[1]


@lru_cache(maxsize=None)
def ortho_frame(t: int, r: float, cutoff: float = DEFAULT_CUTOFF) -> OrthoFrame:
    """Whitening map of the Gram metric restricted to eigenvalues above ``cutoff``.

    For non-integer ``r < t - 1`` the metric is indefinite; negative
    eigendirections fall below the cutoff and are dropped together with the
    null space. ``indefinite`` records whether that happened.
    """
    if not cutoff > 0:
        raise ValueError(f"cutoff must be positive, got {cutoff}")
    g = gram(t, r)
    evals, evecs = np.linalg.eigh(g)
    keep = evals > cutoff
    if not keep.any():
        raise ValueError(f"every Gram eigenvalue is below cutoff {cutoff} (t={t}, r={r})")
    lam = evals[keep][::-1]
    u = evecs[:, keep][:, ::-1]
    iso = (u / np.sqrt(lam)).T
    coords = (u * np.sqrt(lam)).T
    iso.setflags(write=False)
    coords.setflags(write=False)
    return OrthoFrame(
        t=t,
        r=float(r),
        cutoff=cutoff,
        iso_to_ortho=iso,
        coords=coords,
        indefinite=bool((evals < -cutoff).any()),
    )
