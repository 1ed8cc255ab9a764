from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tdesign import perm_core
from tdesign.perm_core import Permutation


def test_cycle_counts():
    assert Permutation.identity(3).cycle_count() == 3
    assert Permutation.swap(2, 0, 1).cycle_count() == 1
    assert Permutation((1, 2, 0)).cycle_count() == 1


def test_swap_is_an_involution():
    s = Permutation.swap(2, 0, 1)
    assert s.compose(s) == Permutation.identity(2)


def test_invalid_permutation_rejected():
    with pytest.raises(ValueError):
        Permutation((0, 0, 1))


def test_permutation_algebra_bundle():
    p, q = Permutation((1, 2, 0)), Permutation.swap(3, 0, 1)
    out = perm_core.permutation_algebra(p, q)
    assert out["compose"] == Permutation(tuple(p(q(i)) for i in range(3)))
    assert out["inverse"].compose(p) == Permutation.identity(3)
    assert out["cycle_count"] == 1
    with pytest.raises(ValueError):
        perm_core.permutation_algebra(p, Permutation.identity(2))


@given(st.permutations(list(range(4))), st.permutations(list(range(4))))
def test_composition_inverse_properties(a, b):
    p, q = Permutation(tuple(a)), Permutation(tuple(b))
    assert p.compose(p.inverse()) == Permutation.identity(4)
    assert p.compose(q).inverse() == q.inverse().compose(p.inverse())
    assert p.compose(q).cycle_count() == q.compose(p).cycle_count()


def test_gram_examples():
    np.testing.assert_allclose(perm_core.gram(2, 2), [[1, 0.5], [0.5, 1]], atol=0)
    np.testing.assert_allclose(perm_core.gram(2, 4), [[1, 0.25], [0.25, 1]], atol=0)


def test_gram_matches_brute_force_overlaps():
    # Permutation states on (C^2)^(x t), overlaps normalized by 2^t.
    t, q = 3, 2
    perms = list(itertools.permutations(range(t)))
    states = []
    for p in perms:
        v = np.zeros(q ** (2 * t))
        for idx in itertools.product(range(q), repeat=t):
            out = tuple(idx[p[i]] for i in range(t))
            v[np.ravel_multi_index(idx + out, (q,) * (2 * t))] = 1.0
        states.append(v)
    brute = np.array([[a @ b for b in states] for a in states]) / q**t
    np.testing.assert_allclose(perm_core.gram(t, q), brute, atol=1e-14)


def test_gram_rank_t3_q2():
    assert perm_core.gram_rank(3, 2) == 5
    assert np.linalg.matrix_rank(perm_core.gram(3, 2), tol=1e-10) == 5


def test_weingarten_examples():
    np.testing.assert_allclose(perm_core.weingarten(2, 2), [[4 / 3, -2 / 3], [-2 / 3, 4 / 3]], atol=1e-14)
    np.testing.assert_allclose(perm_core.weingarten(2, 4), [[16 / 15, -4 / 15], [-4 / 15, 16 / 15]], atol=1e-14)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.floats(1.05, 12.0))
def test_pseudoinverse_axioms(t, r):
    g, w = perm_core.gram(t, r), perm_core.weingarten(t, r)
    scale = max(1.0, np.abs(w).max())
    np.testing.assert_allclose(w @ g @ w, w, atol=1e-8 * scale**2)
    np.testing.assert_allclose(g @ w @ g, g, atol=1e-8 * scale)
    np.testing.assert_allclose(w, w.T, atol=1e-12 * scale)


def test_weingarten_matches_numpy_pinv_on_singular_gram():
    np.testing.assert_allclose(perm_core.weingarten(3, 2), np.linalg.pinv(perm_core.gram(3, 2), rcond=1e-10), atol=1e-10)


@pytest.mark.parametrize("t,r,rank", [(2, 2, 2), (3, 2, 5), (3, 3, 6)])
def test_ortho_frame_whitens(t, r, rank):
    frame = perm_core.ortho_frame(t, r, 1e-12)
    assert frame.rank == rank
    iso = frame.iso_to_ortho
    np.testing.assert_allclose(iso @ perm_core.gram(t, r) @ iso.T, np.eye(rank), atol=1e-12)
    np.testing.assert_allclose(frame.coords.T @ frame.coords, perm_core.gram(t, r), atol=1e-12)


def test_invalid_dimension():
    with pytest.raises(ValueError):
        perm_core.gram(2, 1.0)
