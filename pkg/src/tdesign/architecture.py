"""Circuit architectures: data model, JSON format, generators and block analysis.

An architecture is a list of layers over ``N`` sites of local dimension ``q``.
Each layer is a set of gates acting on pairwise-disjoint site lists. When
``periodic_depth`` is set the layer list is built from repetitions of its first
``periodic_depth`` layers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

Gate = tuple[int, ...]
Layer = tuple[Gate, ...]


class ArchitectureError(ValueError):
    """Invalid architecture data, with the offending layer/gate in the message."""


class DisjointSets:
    """Union-find over ``n`` items with path halving."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.components = n

    def find(self, a: int) -> int:
        parent = self.parent
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if ra > rb:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.components -= 1
        return True

    def union_gate(self, gate: Sequence[int]) -> int:
        """Union all sites of ``gate``; return the number of merges performed."""
        return sum(self.union(gate[0], s) for s in gate[1:])

    def labels(self) -> list[int]:
        """Component label per item, numbered 0.. in order of first appearance."""
        roots: dict[int, int] = {}
        return [roots.setdefault(self.find(i), len(roots)) for i in range(len(self.parent))]


@dataclass(frozen=True)
class Architecture:
    num_sites: int
    local_dim: float
    layers: tuple[Layer, ...]
    periodic_depth: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "layers", _normalize_layers(self.layers))
        validate(self)

    @property
    def num_layers(self) -> int:
        return len(self.layers)

    @property
    def q(self) -> float:
        return self.local_dim

    def period(self) -> tuple[Layer, ...]:
        """One period of a periodic architecture (all layers otherwise)."""
        if self.periodic_depth is None:
            return self.layers
        return self.layers[: self.periodic_depth]

    def tiled(self, periods: int) -> Architecture:
        """Repeat one period ``periods`` times."""
        if self.periodic_depth is None:
            raise ArchitectureError("tiling requires a periodic architecture")
        if periods < 1:
            raise ArchitectureError(f"periods must be >= 1, got {periods}")
        return Architecture(self.num_sites, self.local_dim, self.period() * periods, self.periodic_depth)

    def sublayers(self, start: int, end: int) -> Architecture:
        """Aperiodic architecture made of layers ``start..end`` inclusive."""
        return Architecture(self.num_sites, self.local_dim, self.layers[start : end + 1], None)

    def with_local_dim(self, q: float) -> Architecture:
        return Architecture(self.num_sites, q, self.layers, self.periodic_depth)

    def edges(self) -> set[tuple[int, int]]:
        """Distinct site pairs touched by 2-site gates."""
        return {tuple(sorted(g)) for layer in self.layers for g in layer if len(g) == 2}


def _normalize_layers(layers: Iterable[Iterable[Iterable[int]]]) -> tuple[Layer, ...]:
    out = []
    for li, layer in enumerate(layers):
        gates = []
        for gi, gate in enumerate(layer):
            try:
                sites = tuple(int(s) for s in gate)
            except (TypeError, ValueError) as exc:
                raise ArchitectureError(f"layer {li}, gate {gi}: sites must be integers") from exc
            if any(isinstance(s, bool) for s in gate) or any(
                isinstance(s, float) and not float(s).is_integer() for s in gate
            ):
                raise ArchitectureError(f"layer {li}, gate {gi}: sites must be integers")
            gates.append(sites)
        out.append(tuple(gates))
    return tuple(out)


def validate(arch: Architecture) -> None:
    """Raise :class:`ArchitectureError` naming the first violated invariant."""
    n = arch.num_sites
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 2:
        raise ArchitectureError(f"N must be an integer >= 2, got {n!r}")
    q = arch.local_dim
    if isinstance(q, bool) or not isinstance(q, (int, float, np.integer, np.floating)) or not q > 1:
        raise ArchitectureError(f"q must be a number > 1, got {q!r}")
    for li, layer in enumerate(arch.layers):
        used: dict[int, int] = {}
        for gi, gate in enumerate(layer):
            if len(gate) < 2:
                raise ArchitectureError(f"layer {li}, gate {gi}: gate needs at least 2 sites, got {list(gate)}")
            if len(set(gate)) != len(gate):
                raise ArchitectureError(f"layer {li}, gate {gi}: repeated site in {list(gate)}")
            for s in gate:
                if not 0 <= s < n:
                    raise ArchitectureError(f"layer {li}, gate {gi}: site {s} out of range [0, {n})")
                if s in used:
                    raise ArchitectureError(
                        f"layer {li}: overlapping gates {used[s]} and {gi} both act on site {s}"
                    )
                used[s] = gi
    p = arch.periodic_depth
    if p is not None:
        if isinstance(p, bool) or not isinstance(p, (int, np.integer)) or p < 1:
            raise ArchitectureError(f"periodic_depth must be a positive integer, got {p!r}")
        if len(arch.layers) < p:
            raise ArchitectureError(f"periodic_depth {p} exceeds the {len(arch.layers)} given layers")
        for li in range(p, len(arch.layers)):
            if _layer_key(arch.layers[li]) != _layer_key(arch.layers[li % p]):
                raise ArchitectureError(f"layer {li} does not repeat layer {li % p} of the period")


def _layer_key(layer: Layer) -> frozenset:
    return frozenset(frozenset(g) for g in layer)


# --------------------------------------------------------------------------- JSON


def _number(x: float) -> int | float:
    return int(x) if float(x).is_integer() else float(x)


def to_dict(arch: Architecture) -> dict:
    return {
        "N": int(arch.num_sites),
        "q": _number(arch.local_dim),
        "periodic_depth": arch.periodic_depth,
        "layers": [[list(g) for g in layer] for layer in arch.layers],
    }


def from_dict(data: dict) -> Architecture:
    if not isinstance(data, dict):
        raise ArchitectureError("architecture JSON must be an object")
    missing = [k for k in ("N", "q", "layers") if k not in data]
    if missing:
        raise ArchitectureError(f"architecture JSON missing keys: {missing}")
    unknown = set(data) - {"N", "q", "periodic_depth", "layers"}
    if unknown:
        raise ArchitectureError(f"unknown architecture keys: {sorted(unknown)}")
    layers = data["layers"]
    if not isinstance(layers, list) or not all(isinstance(layer, list) for layer in layers):
        raise ArchitectureError("layers must be a list of lists of gates")
    for li, layer in enumerate(layers):
        for gi, gate in enumerate(layer):
            if not isinstance(gate, list) or not all(
                isinstance(s, int) and not isinstance(s, bool) for s in gate
            ):
                raise ArchitectureError(f"layer {li}, gate {gi}: gate must be a list of site integers")
    return Architecture(data["N"], data["q"], layers, data.get("periodic_depth"))


def parse(text: str) -> Architecture:
    """Parse architecture JSON text."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ArchitectureError(f"malformed JSON: {exc}") from exc
    return from_dict(data)


def serialize(arch: Architecture) -> str:
    return json.dumps(to_dict(arch))


def load(path: str) -> Architecture:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


# ------------------------------------------------------------------ combinatorics


def is_complete(layer: Sequence[Sequence[int]], num_sites: int) -> bool:
    """Every site covered by exactly one gate and every gate acts on 2 sites."""
    covered = [0] * num_sites
    for gate in layer:
        if len(gate) != 2:
            return False
        for s in gate:
            covered[s] += 1
    return all(c == 1 for c in covered)


def is_connected_block(arch: Architecture, start: int, end: int) -> bool:
    """Whether the gates of layers ``start..end`` connect all sites."""
    if not 0 <= start <= end < arch.num_layers:
        raise IndexError(f"layer range [{start}, {end}] outside 0..{arch.num_layers - 1}")
    dsu = DisjointSets(arch.num_sites)
    for layer in arch.layers[start : end + 1]:
        for gate in layer:
            dsu.union_gate(gate)
    return dsu.components == 1


def component_labels(num_sites: int, layers: Iterable[Sequence[Sequence[int]]]) -> list[int]:
    """Connected-component label of each site under the union of ``layers``."""
    dsu = DisjointSets(num_sites)
    for layer in layers:
        for gate in layer:
            dsu.union_gate(gate)
    return dsu.labels()


@dataclass(frozen=True)
class BlockDecomposition:
    """Connected blocks ``(start, end, ell)`` plus the uncovered layer ranges.

    ``ell`` is the block length, or the number of cluster-merging layers when the
    decomposition was built with ``count_merging_only``.
    """

    num_sites: int
    local_dim: float
    blocks: tuple[tuple[int, int, int], ...]
    interstitial: tuple[tuple[int, int], ...]
    count_merging_only: bool = False
    complete: bool = True
    layer_total: int = 0
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def k(self) -> int:
        return len(self.blocks)

    @property
    def mean_block_size(self) -> float | None:
        if not self.blocks:
            return None
        return sum(b[2] for b in self.blocks) / len(self.blocks)

    def to_dict(self) -> dict:
        return {
            "blocks": [list(b) for b in self.blocks],
            "interstitial": [list(r) for r in self.interstitial],
            "k": self.k,
            "mean_block_size": self.mean_block_size,
            "count_merging_only": self.count_merging_only,
            "complete_layers": self.complete,
        }


def _merging_layers(num_sites: int, layers: Sequence[Layer]) -> int:
    dsu = DisjointSets(num_sites)
    count = 0
    for layer in layers:
        merged = False
        before = [dsu.find(s) for s in range(num_sites)]
        for gate in layer:
            if len({before[s] for s in gate}) > 1:
                merged = True
        for gate in layer:
            dsu.union_gate(gate)
        count += merged
    return count


def _block_entry(arch: Architecture, start: int, end: int, count_merging_only: bool) -> tuple[int, int, int]:
    ell = end - start + 1
    if count_merging_only:
        ell = _merging_layers(arch.num_sites, arch.layers[start : end + 1])
    return (start, end, ell)


def greedy_block_decomposition(
    arch: Architecture,
    count_merging_only: bool = False,
    boundaries: Sequence[tuple[int, int]] | None = None,
) -> BlockDecomposition:
    """Split the layer list into connected blocks.

    By default blocks close at the first layer where the accumulated union graph
    spans all sites; trailing layers that never connect become interstitial.
    ``boundaries`` overrides the greedy scan with explicit inclusive
    ``(start, end)`` ranges, which must be increasing, disjoint and connected;
    uncovered layers become interstitial ranges.
    """
    n = arch.num_sites
    blocks: list[tuple[int, int, int]] = []
    interstitial: list[tuple[int, int]] = []
    if boundaries is None:
        start = 0
        dsu = DisjointSets(n)
        for li, layer in enumerate(arch.layers):
            for gate in layer:
                dsu.union_gate(gate)
            if dsu.components == 1:
                blocks.append(_block_entry(arch, start, li, count_merging_only))
                start = li + 1
                dsu = DisjointSets(n)
        if start < arch.num_layers:
            interstitial.append((start, arch.num_layers - 1))
    else:
        cursor = 0
        for bi, (s, e) in enumerate(boundaries):
            if s < cursor or e < s or e >= arch.num_layers:
                raise ArchitectureError(f"block {bi} range ({s}, {e}) is not increasing and in range")
            if not is_connected_block(arch, s, e):
                raise ArchitectureError(f"block {bi} range ({s}, {e}) does not connect all sites")
            if s > cursor:
                interstitial.append((cursor, s - 1))
            blocks.append(_block_entry(arch, s, e, count_merging_only))
            cursor = e + 1
        if cursor < arch.num_layers:
            interstitial.append((cursor, arch.num_layers - 1))
    complete = all(is_complete(layer, n) for layer in arch.layers)
    return BlockDecomposition(
        n, arch.local_dim, tuple(blocks), tuple(interstitial), count_merging_only, complete, arch.num_layers
    )


# ------------------------------------------------------------------- generators


def brickwork_1d(num_sites: int, bc: str = "periodic", q: float = 2) -> Architecture:
    """Two-layer 1D brickwork, sites 0..N-1, period 2.

    Layer A pairs ``(2j, 2j+1)``; layer B pairs ``(2j+1, 2j+2 mod N)``. With
    open boundaries the wrap-around gate is dropped, and odd ``N`` is allowed.
    """
    if bc not in ("periodic", "open"):
        raise ArchitectureError(f"boundary condition must be 'periodic' or 'open', got {bc!r}")
    if num_sites < 2:
        raise ArchitectureError(f"N must be >= 2, got {num_sites}")
    if bc == "periodic" and (num_sites % 2 or num_sites < 4):
        raise ArchitectureError(f"periodic brickwork needs even N >= 4, got {num_sites}")
    a = [(2 * j, 2 * j + 1) for j in range(num_sites // 2)]
    b = [(2 * j + 1, 2 * j + 2) for j in range((num_sites - 1) // 2)]
    if bc == "periodic":
        b.append((num_sites - 1, 0))
    layers = [a, b] if b else [a]
    return Architecture(num_sites, q, layers, len(layers))


def ddim_site_index(coords: Sequence[int], side: int) -> int:
    return sum(int(c) * side**i for i, c in enumerate(coords))


def brickwork_ddim(side: int, dims: int, q: float = 2) -> Architecture:
    """``2D``-layer brickwork on the periodic ``side**dims`` torus.

    Layer ``i < D`` pairs ``x`` with ``x + e_i`` for even ``x_i``; layer
    ``D + i`` does the same for odd ``x_i``.
    """
    if side < 2 or side % 2:
        raise ArchitectureError(f"side length must be even and >= 2, got {side}")
    if dims < 1:
        raise ArchitectureError(f"dimension must be >= 1, got {dims}")
    n = side**dims
    layers = []
    for parity in (0, 1):
        for axis in range(dims):
            layer = []
            for idx in range(n):
                x = [(idx // side**i) % side for i in range(dims)]
                if x[axis] % 2 != parity:
                    continue
                y = list(x)
                y[axis] = (y[axis] + 1) % side
                layer.append((idx, ddim_site_index(y, side)))
            layers.append(layer)
    return Architecture(n, q, layers, 2 * dims)


def _random_matching(sites: list[int], rng: np.random.Generator) -> list[tuple[int, int]]:
    order = rng.permutation(sites)
    return [tuple(sorted((int(order[i]), int(order[i + 1])))) for i in range(0, len(order) - 1, 2)]


def random_connected(
    num_sites: int,
    num_layers: int,
    rng: np.random.Generator,
    q: float = 2,
    complete: bool = True,
    max_tries: int = 10_000,
) -> Architecture:
    """Random layers resampled until their union connects all sites.

    Complete layers are uniform perfect matchings. Incomplete layers keep each
    pair of a uniform matching independently with probability 1/2.
    """
    if complete and num_sites % 2:
        raise ArchitectureError(f"complete layers need even N, got {num_sites}")
    if num_layers < 1:
        raise ArchitectureError(f"need at least one layer, got {num_layers}")
    sites = list(range(num_sites))
    for _ in range(max_tries):
        layers = []
        for _ in range(num_layers):
            gates = sorted(_random_matching(sites, rng))
            if not complete:
                keep = rng.random(len(gates)) < 0.5
                gates = [g for g, k in zip(gates, keep) if k]
            layers.append(gates)
        arch = Architecture(num_sites, q, layers, None)
        if is_connected_block(arch, 0, num_layers - 1):
            return arch
    raise ArchitectureError(f"no connected sample in {max_tries} tries (N={num_sites}, layers={num_layers})")


def path_graph(num_sites: int) -> list[tuple[int, int]]:
    return [(i, i + 1) for i in range(num_sites - 1)]


def complete_graph(num_sites: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(num_sites) for j in range(i + 1, num_sites)]


def sample_gate_sequence(
    edges: Sequence[tuple[int, int]],
    n_g: int,
    rng: np.random.Generator,
    num_sites: int | None = None,
    q: float = 2,
) -> Architecture:
    """``n_g`` single-gate layers with edges drawn i.i.d. uniformly from ``edges``."""
    edges = [tuple(int(s) for s in e) for e in edges]
    if not edges:
        raise ArchitectureError("interaction graph has no edges")
    if n_g < 1:
        raise ArchitectureError(f"n_g must be >= 1, got {n_g}")
    if num_sites is None:
        num_sites = max(max(e) for e in edges) + 1
    picks = rng.integers(0, len(edges), size=n_g)
    return Architecture(num_sites, q, [[edges[i]] for i in picks], None)


def generate(kind: str, **params) -> Architecture:
    """Dispatch to a generator by name.

    Kinds: ``brickwork_1d`` (N, bc, q), ``brickwork_ddim`` (L, D, q) and
    ``random_connected`` (N, layers, rng or seed, q, complete).
    """
    kind = kind.replace("-", "_")
    q = params.get("q", 2)
    if kind in ("brickwork_1d", "brickwork1d"):
        return brickwork_1d(int(params["N"]), params.get("bc", "periodic"), q)
    if kind in ("brickwork_ddim", "brickworkddim"):
        return brickwork_ddim(int(params["L"]), int(params["D"]), q)
    if kind in ("random_connected", "random"):
        rng = params.get("rng")
        if rng is None:
            rng = np.random.default_rng(params.get("seed", 0))
        return random_connected(
            int(params["N"]), int(params["layers"]), rng, q, params.get("complete", True)
        )
    raise ArchitectureError(f"unknown architecture kind {kind!r}")
