"""Moment operators in the orthonormal permutation-label frame and their spectra.

Every site carries the support of the permutation-state metric, whitened by
:func:`tdesign.perm_core.ortho_frame`, so the moment operator of a Haar gate is an
ordinary orthogonal projector and singular values are Euclidean. States are
tensors with one axis per site; site 0 is the leading axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from tdesign import perm_core
from tdesign.architecture import Architecture, DisjointSets

DENSE_LIMIT = 4096
DEFAULT_DIM_GUARD = 1 << 22
DEFAULT_TOL = 1e-10
DEFAULT_MAX_MATVECS = 100_000
DEFAULT_MC_CAP = 256


class DimensionGuardError(RuntimeError):
    """The requested operator exceeds the configured dimension limit."""


# ----------------------------------------------------------------------- spaces


@dataclass(frozen=True)
class SiteSpace:
    """Tensor power of the single-site permutation-state support."""

    t: int
    r: float
    num_sites: int
    cutoff: float = perm_core.DEFAULT_CUTOFF

    @property
    def frame(self) -> perm_core.OrthoFrame:
        return perm_core.ortho_frame(self.t, float(self.r), self.cutoff)

    @property
    def d(self) -> int:
        return self.frame.rank

    @property
    def dim(self) -> int:
        return self.d**self.num_sites

    def check(self, dim_guard: int) -> None:
        if self.dim > dim_guard:
            raise DimensionGuardError(
                f"operator dimension {self.d}^{self.num_sites} = {self.dim} exceeds guard {dim_guard}"
            )


def _uniform_columns(t: int, r: float, k: int, cutoff: float) -> np.ndarray:
    """Columns ``(B e_sigma)^{(x) k}`` for every permutation ``sigma``."""
    b = perm_core.ortho_frame(t, float(r), cutoff).coords
    cols = b
    for _ in range(k - 1):
        cols = np.einsum("in,jn->ijn", cols, b).reshape(-1, b.shape[1])
    return cols


def orthonormal_columns(m: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of the column span of ``m`` (rank-revealing SVD)."""
    if m.shape[1] == 0:
        return m
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return u[:, :0]
    return u[:, s > rtol * s[0]]


def product_basis(space: SiteSpace, groups: Sequence[tuple[Sequence[int], np.ndarray]]) -> np.ndarray:
    """Tensor product of per-group bases, reordered to site order.

    ``groups`` pairs a list of sites with a ``d^len(sites) x m`` basis; the
    groups must partition all sites.
    """
    d, n = space.d, space.num_sites
    full = np.ones((1, 1))
    order: list[int] = []
    for sites, basis in groups:
        full = np.kron(full, basis)
        order.extend(sites)
    if sorted(order) != list(range(n)):
        raise ValueError("groups must partition the sites")
    m = full.shape[1]
    tens = full.reshape((d,) * n + (m,))
    tens = np.transpose(tens, list(np.argsort(order)) + [n])
    return tens.reshape(d**n, m)


def uniform_basis(space: SiteSpace, components: Sequence[Sequence[int]] | None = None) -> np.ndarray:
    """Orthonormal basis of products of uniform permutation states.

    With ``components=None`` the whole system is one component, giving the
    globally uniform states. Otherwise each component carries its own
    permutation and the basis spans all such products.
    """
    if components is None:
        components = [list(range(space.num_sites))]
    groups = [
        (list(c), orthonormal_columns(_uniform_columns(space.t, space.r, len(c), space.cutoff)))
        for c in components
    ]
    return product_basis(space, groups)


# ------------------------------------------------------------------------ gates


@lru_cache(maxsize=None)
def gate_matrix(k: int, t: int, r: float, cutoff: float = perm_core.DEFAULT_CUTOFF) -> np.ndarray:
    """Dense ``d^k x d^k`` moment operator of a Haar gate on ``k`` sites.

    Built as ``sum_{sigma,tau} |tau>^k Wg(r^k)_{tau sigma} <sigma|^k`` in the
    orthonormal frame. When the single-site metric is indefinite the frame keeps
    only the positive part, and the orthogonal projector onto the span of the
    uniform states is used instead.
    """
    if k < 1:
        raise ValueError(f"gate must act on at least one site, got k={k}")
    frame = perm_core.ortho_frame(t, float(r), cutoff)
    v = _uniform_columns(t, r, k, cutoff)
    if frame.indefinite:
        basis = orthonormal_columns(v)
        p = basis @ basis.T
    else:
        p = v @ perm_core.weingarten(t, float(r) ** k) @ v.T
    p = 0.5 * (p + p.T)
    p.setflags(write=False)
    return p


def gate_label_action(k: int, t: int, r: float) -> np.ndarray:
    """Gate action on label coordinates, computed without the orthonormal frame.

    Column ``rho`` (a multi-index over ``k`` permutations, site 0 most
    significant) holds the label coefficients of the image of
    ``|rho_0> (x) ... (x) |rho_{k-1}>``, which are nonzero only on uniform
    labels ``(tau, ..., tau)``.
    """
    g = perm_core.gram(t, r)
    wg = perm_core.weingarten(t, float(r) ** k)
    n = g.shape[0]
    out = np.zeros((n**k, n**k))
    uniform_rows = [sum(tau * n**i for i in range(k)) for tau in range(n)]
    for col, rho in enumerate(np.ndindex(*([n] * k))):
        overlaps = np.prod([g[:, rho_i] for rho_i in rho], axis=0)
        out[uniform_rows, col] = wg @ overlaps
    return out


def _apply_gate(psi: np.ndarray, mat: np.ndarray, sites: Sequence[int], d: int) -> np.ndarray:
    k = len(sites)
    front = list(range(k))
    psi = np.moveaxis(psi, list(sites), front)
    shape = psi.shape
    out = (mat @ psi.reshape(d**k, -1)).reshape(shape)
    return np.moveaxis(out, front, list(sites))


# --------------------------------------------------------------------- operators


@dataclass(eq=False)
class MomentOperator:
    """Product of layers of gate projectors, applied in list order.

    ``unit_basis`` holds orthonormal columns spanning the known unit singular
    subspace used for deflation.
    """

    space: SiteSpace
    layers: tuple[tuple[tuple[int, ...], ...], ...]
    unit_basis: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def unit_dim(self) -> int:
        return self.unit_basis.shape[1]

    def _run(self, x: np.ndarray, adjoint: bool) -> np.ndarray:
        single = x.ndim == 1
        m = 1 if single else x.shape[1]
        d, n = self.space.d, self.space.num_sites
        psi = np.asarray(x, dtype=float).reshape((d,) * n + (m,))
        order = reversed(self.layers) if adjoint else self.layers
        for layer in order:
            for gate in layer:
                mat = gate_matrix(len(gate), self.space.t, float(self.space.r), self.space.cutoff)
                psi = _apply_gate(psi, mat, gate, d)
        out = psi.reshape(self.dim, m)
        return out[:, 0] if single else out

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self._run(x, adjoint=False)

    def rmatvec(self, x: np.ndarray) -> np.ndarray:
        """Apply the transpose (every gate projector is symmetric)."""
        return self._run(x, adjoint=True)

    def dense(self, limit: int = DENSE_LIMIT, chunk: int = 512) -> np.ndarray:
        if self.dim > limit:
            raise DimensionGuardError(f"dense matrix of dimension {self.dim} exceeds limit {limit}")
        out = np.empty((self.dim, self.dim))
        for start in range(0, self.dim, chunk):
            stop = min(start + chunk, self.dim)
            block = np.zeros((self.dim, stop - start))
            block[np.arange(start, stop), np.arange(stop - start)] = 1.0
            out[:, start:stop] = self.matvec(block)
        return out

    def then(self, other: MomentOperator) -> MomentOperator:
        """Operator applying ``self`` first and ``other`` second."""
        if other.space != self.space:
            raise ValueError("operators act on different site spaces")
        return MomentOperator(self.space, self.layers + other.layers, self.unit_basis, dict(self.meta))

    def power(self, k: int) -> MomentOperator:
        if k < 0:
            raise ValueError(f"power must be >= 0, got {k}")
        meta = dict(self.meta, power=k)
        return MomentOperator(self.space, self.layers * k, self.unit_basis, meta)


def _check_t(t: int) -> None:
    if isinstance(t, bool) or not isinstance(t, (int, np.integer)) or t < 1:
        raise ValueError(f"t must be a positive integer, got {t!r}")


def gate_projector(k: int, t: int, r: float, cutoff: float = perm_core.DEFAULT_CUTOFF) -> MomentOperator:
    """Single Haar gate on ``k`` sites as a moment operator."""
    _check_t(t)
    space = SiteSpace(t, float(r), k, cutoff)
    layers = ((tuple(range(k)),),) if k >= 2 else ()
    meta = {"source": "gate", "k": k}
    return MomentOperator(space, layers, uniform_basis(space), meta)


def _arch_space(arch: Architecture, t: int, dim_guard: int, cutoff: float) -> SiteSpace:
    _check_t(t)
    space = SiteSpace(t, float(arch.local_dim), arch.num_sites, cutoff)
    space.check(dim_guard)
    return space


def layer_operator(
    arch: Architecture,
    layer_index: int,
    t: int,
    dim_guard: int = DEFAULT_DIM_GUARD,
    cutoff: float = perm_core.DEFAULT_CUTOFF,
) -> MomentOperator:
    """Projector of one layer: commuting gate projectors, identity elsewhere.

    The unit basis is the range of the layer itself: products of uniform states
    over each gate, with untouched sites free.
    """
    if not 0 <= layer_index < arch.num_layers:
        raise IndexError(f"layer {layer_index} outside 0..{arch.num_layers - 1}")
    space = _arch_space(arch, t, dim_guard, cutoff)
    layer = arch.layers[layer_index]
    touched = {s for g in layer for s in g}
    groups = [(list(g), orthonormal_columns(_uniform_columns(t, space.r, len(g), cutoff))) for g in layer]
    groups += [([s], np.eye(space.d)) for s in range(arch.num_sites) if s not in touched]
    meta = {"source": "layer", "layer": layer_index}
    return MomentOperator(space, (layer,), product_basis(space, groups), meta)


def transfer_matrix(
    arch: Architecture,
    layer_range: tuple[int, int] | None = None,
    t: int = 2,
    dim_guard: int = DEFAULT_DIM_GUARD,
    cutoff: float = perm_core.DEFAULT_CUTOFF,
) -> MomentOperator:
    """Ordered product of the layers in ``layer_range`` (inclusive).

    The default range is one period of a periodic architecture, or every layer.
    The unit basis is always the globally uniform states; a disconnected range
    therefore keeps extra unit singular values outside the deflated space.
    """
    if layer_range is None:
        layer_range = (0, len(arch.period()) - 1)
    start, end = layer_range
    if not 0 <= start <= end < arch.num_layers:
        raise IndexError(f"layer range {layer_range} outside 0..{arch.num_layers - 1}")
    space = _arch_space(arch, t, dim_guard, cutoff)
    meta = {"source": "architecture", "layer_range": [start, end]}
    return MomentOperator(space, tuple(arch.layers[start : end + 1]), uniform_basis(space), meta)


# ---------------------------------------------------------------- singular values


@dataclass(frozen=True)
class SingularReport:
    unit_dim: int
    ssv: float
    method: str
    residual: float
    converged: bool = True
    matvecs: int = 0

    def to_dict(self) -> dict:
        return {
            "unit_dim": self.unit_dim,
            "ssv": self.ssv,
            "method": self.method,
            "residual": self.residual,
            "converged": self.converged,
            "matvecs": self.matvecs,
        }


def singular_values(op: MomentOperator, limit: int = DENSE_LIMIT) -> np.ndarray:
    """Full singular spectrum, descending."""
    return np.linalg.svd(op.dense(limit), compute_uv=False)


def _deflate(x: np.ndarray, z: np.ndarray) -> np.ndarray:
    if z.shape[1] == 0:
        return x
    x = x - z @ (z.T @ x)
    return x - z @ (z.T @ x)


def _dense_ssv(op: MomentOperator, limit: int) -> SingularReport:
    t_mat = op.dense(limit)
    z = op.unit_basis
    restricted = t_mat - (t_mat @ z) @ z.T
    s = np.linalg.svd(restricted, compute_uv=False)
    ssv = float(min(max(s[0], 0.0), 1.0)) if s.size else 0.0
    fixed = float(np.abs(t_mat @ z - z).max()) if z.shape[1] else 0.0
    return SingularReport(op.unit_dim, ssv, "dense", fixed, True, op.dim)


def _lanczos_ssv(
    op: MomentOperator, tol: float, max_matvecs: int, krylov_dim: int, seed: int
) -> SingularReport:
    """Largest eigenvalue of ``D T^T T D`` by restarted Lanczos.

    ``D`` projects out the unit basis. The Krylov basis is fully
    reorthogonalized (twice) against itself and the unit basis; each cycle
    restarts from the current Ritz vector.
    """
    z = op.unit_basis
    dim = op.dim
    m = max(2, min(krylov_dim, dim))
    rng = np.random.default_rng(seed)
    x = _deflate(rng.standard_normal(dim), z)
    matvecs = 0
    theta, residual = 0.0, math.inf
    norm = np.linalg.norm(x)
    if norm == 0.0:
        return SingularReport(op.unit_dim, 0.0, "iterative", 0.0, True, 0)
    x /= norm

    def apply(v: np.ndarray) -> np.ndarray:
        w = op.rmatvec(op.matvec(_deflate(v, z)))
        return _deflate(w, z)

    while matvecs < max_matvecs:
        basis = np.zeros((dim, m + 1))
        alpha = np.zeros(m)
        beta = np.zeros(m)
        basis[:, 0] = x
        steps = 0
        for j in range(m):
            w = apply(basis[:, j])
            matvecs += 1
            alpha[j] = basis[:, j] @ w
            for _ in range(2):
                w -= basis[:, : j + 1] @ (basis[:, : j + 1].T @ w)
            w = _deflate(w, z)
            beta[j] = np.linalg.norm(w)
            steps = j + 1
            if beta[j] <= 1e-14 or matvecs >= max_matvecs:
                break
            basis[:, j + 1] = w / beta[j]
        tri = np.diag(alpha[:steps])
        if steps > 1:
            off = beta[: steps - 1]
            tri += np.diag(off, 1) + np.diag(off, -1)
        evals, evecs = np.linalg.eigh(tri)
        theta = float(evals[-1])
        y = evecs[:, -1]
        x = basis[:, :steps] @ y
        x /= np.linalg.norm(x)
        residual = float(beta[steps - 1] * abs(y[-1]))
        if residual <= tol:
            break
    converged = residual <= tol
    ssv = float(min(math.sqrt(max(theta, 0.0)), 1.0))
    return SingularReport(op.unit_dim, ssv, "iterative", residual, converged, matvecs)


def subleading_singular_value(
    op: MomentOperator,
    method: str = "auto",
    tol: float = DEFAULT_TOL,
    max_matvecs: int = DEFAULT_MAX_MATVECS,
    krylov_dim: int = 40,
    seed: int = 0,
    dense_limit: int = DENSE_LIMIT,
) -> SingularReport:
    """Largest singular value on the complement of ``op.unit_basis``.

    ``method`` is ``dense`` (SVD of the deflated matrix), ``iterative``
    (Lanczos on the deflated ``T^T T``) or ``auto`` (dense up to
    ``dense_limit``). A non-converged iterative run is reported with
    ``converged=False`` and its best estimate.
    """
    if method == "auto":
        method = "dense" if op.dim <= dense_limit else "iterative"
    if method == "dense":
        return _dense_ssv(op, dense_limit)
    if method == "iterative":
        return _lanczos_ssv(op, tol, max_matvecs, krylov_dim, seed)
    raise ValueError(f"unknown method {method!r}; expected dense, iterative or auto")


def kth_singular_value(op: MomentOperator, k: int, limit: int = DENSE_LIMIT) -> float:
    """The ``k``-th largest singular value (1-based) of the dense operator."""
    s = singular_values(op, limit)
    return float(s[k - 1]) if k <= s.size else 0.0


# -------------------------------------------------------------- cluster graphs


def _graph_layout(g) -> tuple[list[list[int]], list[tuple[int, int]]]:
    """Concrete sites per node and one 2-site gate per edge."""
    sites, offset = [], 0
    for w in g.weights:
        sites.append(list(range(offset, offset + w)))
        offset += w
    free = [0] * len(g.weights)
    gates = []
    for a, b in g.edges:
        gates.append((sites[a][free[a]], sites[b][free[b]]))
        free[a] += 1
        free[b] += 1
    return sites, gates


def cluster_graph_operators(
    g, t: int, r: float, dim_guard: int = DEFAULT_DIM_GUARD, cutoff: float = perm_core.DEFAULT_CUTOFF
) -> tuple[MomentOperator, MomentOperator, MomentOperator]:
    """``(Q, P, P Q)`` for a cluster graph.

    ``Q`` projects every node onto its uniform states, ``P`` applies one 2-site
    gate per edge. Each operator carries the unit basis of ``P Q``: products of
    uniform states over the connected components of the graph.
    """
    _check_t(t)
    sites, gates = _graph_layout(g)
    space = SiteSpace(t, float(r), sum(g.weights), cutoff)
    space.check(dim_guard)
    dsu = DisjointSets(len(g.weights))
    for a, b in g.edges:
        dsu.union(a, b)
    labels = dsu.labels()
    comps: dict[int, list[int]] = {}
    for node, lab in enumerate(labels):
        comps.setdefault(lab, []).extend(sites[node])
    unit = uniform_basis(space, list(comps.values()))
    q_layer = tuple(tuple(s) for s in sites if len(s) >= 2)
    p_layer = tuple(gates)
    meta = {"source": "cluster_graph", "weights": list(g.weights), "edges": [list(e) for e in g.edges]}
    q_op = MomentOperator(space, (q_layer,), unit, dict(meta, part="Q"))
    p_op = MomentOperator(space, (p_layer,), unit, dict(meta, part="P"))
    pq = MomentOperator(space, (q_layer, p_layer), unit, dict(meta, part="PQ"))
    return q_op, p_op, pq


def layer_restricted_report(g, t: int, r: float, method: str = "auto", **kwargs) -> SingularReport:
    dim_guard = kwargs.pop("dim_guard", DEFAULT_DIM_GUARD)
    _, _, pq = cluster_graph_operators(g, t, r, dim_guard)
    return subleading_singular_value(pq, method, **kwargs)


def layer_restricted_ssv(g, t: int, r: float, method: str = "auto", **kwargs) -> float:
    """Subleading singular value of ``P Q`` for a cluster graph.

    For a connected graph the deflated space is the globally uniform states; for
    a disconnected graph it is the uniform states of each component.
    """
    return layer_restricted_report(g, t, r, method, **kwargs).ssv


def two_layer_eigen_ssv(g, t: int, r: float, dim_guard: int = DENSE_LIMIT) -> float:
    """``sqrt`` of the largest non-unit eigenvalue of ``Q P Q`` (dense)."""
    q_op, p_op, _ = cluster_graph_operators(g, t, r, dim_guard)
    qm, pm = q_op.dense(dim_guard), p_op.dense(dim_guard)
    qpq = qm @ pm @ qm
    z = q_op.unit_basis
    proj = np.eye(qpq.shape[0]) - z @ z.T
    restricted = proj @ qpq @ proj
    evals = np.linalg.eigvalsh(0.5 * (restricted + restricted.T))
    return float(math.sqrt(min(max(evals[-1], 0.0), 1.0)))


def layer_gap_bound(
    arch: Architecture,
    t: int = 2,
    layer_range: tuple[int, int] | None = None,
    method: str = "auto",
) -> dict:
    """Product bound on the squared subleading singular value of a block.

    Returns ``{"bound": 1 - prod_{i>=2}(1 - s_i^2), "layer_ssvs": [s_2, ...]}``
    with each ``s_i`` the layer-restricted value of layer ``i`` against the
    clusters merged by the layers before it.
    """
    from tdesign.cluster_graph import build_cluster_graph

    if layer_range is None:
        layer_range = (0, arch.num_layers - 1)
    start, end = layer_range
    sub = arch.sublayers(start, end)
    ssvs = []
    for i in range(1, sub.num_layers):
        g = build_cluster_graph(sub, i - 1, i)
        ssvs.append(layer_restricted_ssv(g, t, float(arch.local_dim), method))
    prod = float(np.prod([1.0 - s * s for s in ssvs])) if ssvs else 1.0
    return {"bound": 1.0 - prod, "layer_ssvs": ssvs}


# -------------------------------------------------------------- frame potential


def _untouched_sites(arch: Architecture, layers) -> int:
    touched = {s for layer in layers for g in layer for s in g}
    return arch.num_sites - len(touched)


def frame_potential_exact(
    arch: Architecture,
    k_periods: int,
    t: int = 2,
    dim_guard: int = DENSE_LIMIT,
) -> float:
    """``||T^k||_F^2`` of the moment operator of ``k`` periods.

    Sites that no gate touches contribute the identity on the full
    ``q^(2t)``-dimensional replica space.
    """
    if k_periods < 0:
        raise ValueError(f"k_periods must be >= 0, got {k_periods}")
    if k_periods == 0:
        return float(arch.local_dim) ** (2 * t * arch.num_sites)
    period = arch.period()
    op = transfer_matrix(arch, (0, len(period) - 1), t, dim_guard)
    mat = np.linalg.matrix_power(op.dense(dim_guard), k_periods)
    free = _untouched_sites(arch, period)
    return float(np.sum(mat * mat)) * float(arch.local_dim) ** (2 * t * free)


def haar_unitaries(dim: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` Haar-random ``dim x dim`` unitaries (QR of Ginibre, phase-fixed)."""
    z = (rng.standard_normal((size, dim, dim)) + 1j * rng.standard_normal((size, dim, dim))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=1, axis2=2)
    phases = diag / np.abs(diag)
    return q * phases[:, None, :]


def _integer_q(arch: Architecture) -> int:
    q = float(arch.local_dim)
    if not q.is_integer() or q < 2:
        raise ValueError(f"Haar sampling needs integer q >= 2, got {arch.local_dim}")
    return int(q)


def sample_circuits(
    arch: Architecture, k_periods: int, size: int, rng: np.random.Generator
) -> np.ndarray:
    """Circuit unitaries ``(size, q^N, q^N)`` with independent Haar gates."""
    q = _integer_q(arch)
    n = arch.num_sites
    dim = q**n
    u = np.broadcast_to(np.eye(dim, dtype=complex), (size, dim, dim)).copy()
    for _ in range(k_periods):
        for layer in arch.period():
            for gate in layer:
                k = len(gate)
                g = haar_unitaries(q**k, size, rng)
                psi = u.reshape((size,) + (q,) * n + (dim,))
                axes = [1 + s for s in gate]
                front = list(range(1, k + 1))
                psi = np.moveaxis(psi, axes, front)
                shape = psi.shape
                psi = np.matmul(g, psi.reshape(size, q**k, -1)).reshape(shape)
                u = np.moveaxis(psi, front, axes).reshape(size, dim, dim)
    return u


def frame_potential_mc(
    arch: Architecture,
    k_periods: int,
    t: int,
    samples: int,
    rng: np.random.Generator,
    cap: int = DEFAULT_MC_CAP,
    batch: int = 500,
) -> dict:
    """Monte-Carlo estimate of ``E |tr(U^dagger V)|^(2t)`` over circuit pairs."""
    q = _integer_q(arch)
    dim = q**arch.num_sites
    if dim > cap:
        raise DimensionGuardError(f"q^N = {dim} exceeds Monte-Carlo cap {cap}")
    if samples < 2:
        raise ValueError(f"need at least 2 samples, got {samples}")
    values = []
    done = 0
    while done < samples:
        size = min(batch, samples - done)
        u = sample_circuits(arch, k_periods, size, rng)
        v = sample_circuits(arch, k_periods, size, rng)
        tr = np.einsum("bij,bij->b", u.conj(), v)
        values.append(np.abs(tr) ** (2 * t))
        done += size
    vals = np.concatenate(values)
    return {
        "estimate": float(vals.mean()),
        "std_error": float(vals.std(ddof=1) / math.sqrt(vals.size)),
        "samples": int(vals.size),
    }
