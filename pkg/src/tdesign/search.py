"""Stochastic exploration of architectures.

Two tools live here: simulated annealing that hunts for connected architectures
with a large subleading singular value, and Monte Carlo statistics for circuits
whose gate locations are themselves random.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import logsumexp

from tdesign import bounds, spectral
from tdesign.architecture import (
    Architecture,
    ArchitectureError,
    DisjointSets,
    greedy_block_decomposition,
    is_connected_block,
    random_connected,
)

# ------------------------------------------------------------------ annealing


@dataclass(frozen=True)
class AnnealConfig:
    """Simulated annealing settings.

    Attributes:
        iterations: Number of proposals.
        move_mean: Mean of the geometric number of edge moves per proposal.
        cooling: Multiplicative temperature factor per iteration.
        t_start: Starting temperature; ``None`` sets it to the standard deviation
            of the objective over ``auto_samples`` random connected architectures.
        seed: Seed of the chain.
        connectivity_policy: ``reject`` discards disconnected proposals;
            ``penalize`` scores them as ``value - penalty``.
        penalty: Objective offset for disconnected states under ``penalize``.
        auto_samples: Sample count for the automatic start temperature.
    """

    iterations: int = 5000
    move_mean: float = 1.0
    cooling: float = 0.999
    t_start: float | None = None
    seed: int = 0
    connectivity_policy: str = "reject"
    penalty: float = 1.0
    auto_samples: int = 50

    def __post_init__(self) -> None:
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if not 0 < self.cooling < 1:
            raise ValueError(f"cooling factor must lie in (0, 1), got {self.cooling}")
        if not self.move_mean >= 1:
            raise ValueError(f"move_mean must be >= 1 (at least one move per proposal), got {self.move_mean}")
        if self.connectivity_policy not in ("reject", "penalize"):
            raise ValueError(f"connectivity_policy must be 'reject' or 'penalize', got {self.connectivity_policy!r}")
        if self.t_start is not None and not self.t_start > 0:
            raise ValueError(f"t_start must be positive, got {self.t_start}")


@dataclass
class AnnealResult:
    best_arch: Architecture
    best_ssv: float
    t_start: float
    trace: list[dict] = field(default_factory=list)
    config: AnnealConfig | None = None

    def to_dict(self) -> dict:
        from tdesign.architecture import to_dict as arch_to_dict

        return {
            "best_arch": arch_to_dict(self.best_arch),
            "best_ssv": self.best_ssv,
            "t_start": self.t_start,
            "config": None if self.config is None else asdict(self.config),
            "trace": self.trace,
        }


def objective_value(arch: Architecture, t: int = 2) -> float:
    """The ``(t!+1)``-th largest singular value of the block's moment operator.

    For a connected block the top ``t!`` singular values are the unit ones, so
    this is the subleading singular value.
    """
    op = spectral.transfer_matrix(arch, (0, arch.num_layers - 1), t=t, dim_guard=spectral.DENSE_LIMIT)
    return spectral.kth_singular_value(op, math.factorial(t) + 1)


def _free_pairs(layer: Sequence[tuple[int, int]], n: int) -> list[tuple[int, int]]:
    used = {s for g in layer for s in g}
    free = [s for s in range(n) if s not in used]
    return [(a, b) for i, a in enumerate(free) for b in free[i + 1 :]]


def _propose(layers: list[list[tuple[int, int]]], n: int, rng: np.random.Generator, moves: int) -> list[list[tuple[int, int]]]:
    """Apply ``moves`` uniform edge additions or deletions, each equally likely."""
    out = [list(layer) for layer in layers]
    for _ in range(moves):
        additions = [(li, p) for li, layer in enumerate(out) for p in _free_pairs(layer, n)]
        deletions = [(li, gi) for li, layer in enumerate(out) for gi in range(len(layer))]
        add = rng.random() < 0.5
        if add and not additions:
            add = False
        if not add and not deletions:
            add = True
        if add:
            li, pair = additions[rng.integers(len(additions))]
            out[li].append(pair)
            out[li].sort()
        else:
            li, gi = deletions[rng.integers(len(deletions))]
            del out[li][gi]
    return out


def _score(arch: Architecture, t: int, cfg: AnnealConfig) -> tuple[float, bool]:
    connected = is_connected_block(arch, 0, arch.num_layers - 1)
    value = objective_value(arch, t)
    if connected:
        return value, True
    return value - cfg.penalty, False


def auto_temperature(num_sites: int, q: float, t: int, num_layers: int, samples: int, rng: np.random.Generator) -> float:
    """Standard deviation of the objective over random connected architectures."""
    vals = [objective_value(random_connected(num_sites, num_layers, rng, q, complete=False), t) for _ in range(samples)]
    sd = float(np.std(vals))
    return sd if sd > 0 else 1e-3


def anneal_max_ssv(num_sites: int, q: float = 2, t: int = 2, num_layers: int = 4, config: AnnealConfig | None = None) -> AnnealResult:
    """Metropolis search for the connected ``num_layers``-layer block of largest SSV.

    Layers are incomplete in general. Each proposal applies a geometric number
    of moves, each adding a uniformly chosen free ``(layer, pair)`` or deleting
    a uniformly chosen gate. Proposals that disconnect the block are discarded
    under the ``reject`` policy. The trace holds one row per iteration.

    Raises:
        spectral.DimensionGuardError: if ``q^N`` exceeds the dense limit.
    """
    cfg = config or AnnealConfig()
    rng = np.random.default_rng(cfg.seed)
    spectral.SiteSpace(t, float(q), num_sites).check(spectral.DENSE_LIMIT)
    temp0 = cfg.t_start
    if temp0 is None:
        temp0 = auto_temperature(num_sites, q, t, num_layers, cfg.auto_samples, rng)
    start = random_connected(num_sites, num_layers, rng, q, complete=False)
    layers = [list(layer) for layer in start.layers]
    current, _ = _score(start, t, cfg)
    best_arch, best = start, current
    p = 1.0 / cfg.move_mean
    trace: list[dict] = []
    temp = temp0
    for it in range(cfg.iterations):
        moves = int(rng.geometric(p))
        cand_layers = _propose(layers, num_sites, rng, moves)
        cand = Architecture(num_sites, q, cand_layers, None)
        row = {"iteration": it, "temperature": temp, "beta": 1.0 / temp, "moves": moves}
        connected = is_connected_block(cand, 0, num_layers - 1)
        if not connected and cfg.connectivity_policy == "reject":
            row.update(proposal=None, accepted=False, rejected_disconnected=True)
        else:
            value, connected = _score(cand, t, cfg)
            delta = value - current
            accept = delta >= 0 or rng.random() < math.exp(delta / temp)
            row.update(proposal=value, accepted=bool(accept), rejected_disconnected=False)
            if accept:
                layers, current = cand_layers, value
                if connected and value > best:
                    best, best_arch = value, cand
        row.update(ssv=current, best=best)
        trace.append(row)
        temp *= cfg.cooling
    return AnnealResult(best_arch, float(best), float(temp0), trace, cfg)


# ----------------------------------------------------------------- ensembles


@dataclass
class EnsembleStats:
    """Gates-to-connect counts and optional fixed-``n_g`` block statistics."""

    trials: int
    counts: np.ndarray
    k_samples: np.ndarray | None = None
    ell_samples: np.ndarray | None = None
    n_g: int | None = None

    @property
    def mean(self) -> float:
        return float(self.counts.mean())

    @property
    def std(self) -> float:
        return float(self.counts.std(ddof=1)) if self.trials > 1 else 0.0

    @property
    def std_error(self) -> float:
        return self.std / math.sqrt(self.trials)

    def summary(self) -> dict:
        out = {
            "trials": self.trials,
            "mean": self.mean,
            "std": self.std,
            "std_error": self.std_error,
            "min": int(self.counts.min()),
            "max": int(self.counts.max()),
        }
        if self.k_samples is not None:
            out["n_g"] = self.n_g
            out["k_mean"] = float(self.k_samples.mean())
            ells = self.ell_samples[~np.isnan(self.ell_samples)]
            out["ell_bar_mean"] = float(ells.mean()) if ells.size else None
        return out

    def to_dict(self) -> dict:
        d = self.summary()
        d["counts"] = self.counts.tolist()
        if self.k_samples is not None:
            d["k_samples"] = self.k_samples.tolist()
            d["ell_samples"] = [None if math.isnan(x) else x for x in self.ell_samples.tolist()]
        return d


def _num_sites(edges: Sequence[tuple[int, int]]) -> int:
    return max(max(e) for e in edges) + 1


def _check_connected(edges: Sequence[tuple[int, int]], n: int) -> None:
    dsu = DisjointSets(n)
    for a, b in edges:
        dsu.union(a, b)
    if dsu.components != 1:
        raise ArchitectureError("interaction graph is not connected")


def gates_to_connect(edges: Sequence[tuple[int, int]], rng: np.random.Generator, num_sites: int | None = None) -> int:
    """Draw edges i.i.d. uniformly until the drawn gates span all sites."""
    n = num_sites or _num_sites(edges)
    dsu = DisjointSets(n)
    count = 0
    batch = max(16, 4 * n)
    while True:
        for i in rng.integers(0, len(edges), size=batch):
            count += 1
            a, b = edges[i]
            dsu.union(a, b)
            if dsu.components == 1:
                return count


def pack_layers(gates: Sequence[tuple[int, int]]) -> list[list[tuple[int, int]]]:
    """Group a gate sequence into layers, opening a new layer on the first overlap."""
    layers: list[list[tuple[int, int]]] = []
    used: set[int] = set()
    for g in gates:
        if not layers or used & set(g):
            layers.append([])
            used = set()
        layers[-1].append(tuple(g))
        used.update(g)
    return layers


def gate_sequence_architecture(
    gates: Sequence[tuple[int, int]], num_sites: int, q: float = 2, layering: str = "packed"
) -> Architecture:
    """Architecture of a gate sequence: one gate per layer or greedily packed."""
    if layering == "sequential":
        layers = [[tuple(g)] for g in gates]
    elif layering == "packed":
        layers = pack_layers(gates)
    else:
        raise ValueError(f"layering must be 'sequential' or 'packed', got {layering!r}")
    return Architecture(num_sites, q, layers, None)


def ensemble_connection_stats(
    edges: Sequence[tuple[int, int]],
    trials: int,
    rng: np.random.Generator,
    num_sites: int | None = None,
    n_g: int | None = None,
    q: float = 2,
    layering: str = "packed",
    count_merging_only: bool = False,
) -> EnsembleStats:
    """Monte Carlo statistics of circuits with i.i.d. uniform gate locations.

    Every trial records how many gates it takes to connect all sites. With
    ``n_g`` set, each trial also draws ``n_g`` gates and records the greedy
    connection count ``k`` and mean block size.
    """
    edges = [tuple(int(s) for s in e) for e in edges]
    if not edges:
        raise ArchitectureError("interaction graph has no edges")
    n = num_sites or _num_sites(edges)
    _check_connected(edges, n)
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    counts = np.array([gates_to_connect(edges, rng, n) for _ in range(trials)], dtype=np.int64)
    if n_g is None:
        return EnsembleStats(trials, counts)
    ks = np.empty(trials, dtype=np.int64)
    ells = np.empty(trials)
    for i in range(trials):
        picks = rng.integers(0, len(edges), size=n_g)
        arch = gate_sequence_architecture([edges[j] for j in picks], n, q, layering)
        dec = greedy_block_decomposition(arch, count_merging_only=count_merging_only)
        ks[i] = dec.k
        ells[i] = dec.mean_block_size if dec.k else math.nan
    return EnsembleStats(trials, counts, ks, ells, n_g)


def coupon_collector_mean(num_edges: int) -> float:
    """``n H_n``: expected draws to see all ``n`` equally likely edges."""
    return num_edges * sum(1.0 / i for i in range(1, num_edges + 1))


# ---------------------------------------------------------- averaged bound


def _log_error(dec, t: int, c: float) -> tuple[float, float]:
    """Per-sample log error bounds: exact block sum and the mean-block-size form."""
    n, q = dec.num_sites, float(dec.local_dim)
    pre = bounds.error_prefactor_log(n, q, t)
    if dec.k == 0:
        return pre, pre
    exact = pre - sum(bounds.block_rate(c, b[2]) for b in dec.blocks)
    jensen = pre - dec.k * bounds.block_rate(c, dec.mean_block_size)
    return exact, jensen


def averaged_bound_check(
    sampler: Callable[[np.random.Generator], Architecture],
    t: int,
    eps: float,
    samples: int,
    rng: np.random.Generator,
    allow_conjectured: bool = False,
    count_merging_only: bool = False,
    c_source: str | None = None,
) -> dict:
    """Ensemble-averaged error bound for architectures drawn from ``sampler``.

    The triangle inequality bounds the error of the averaged channel by the
    average of per-architecture bounds ``E_i = q^{2Nt} prod_j s(ell_ij)``. The
    report gives ``log <E>`` (computed with logsumexp) for both the exact block
    product and the mean-block-size relaxation, and certifies the design when
    ``log <E> <= log eps``. ``<log E>`` is also returned for reference; it is
    never larger than ``log <E>`` and so cannot certify anything by itself.

    With ``allow_conjectured`` the report adds the conjectured threshold on the
    mean connection count and the gate count it implies.
    """
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    exact, jensen, ks, ells, kstars, gates_per_block = [], [], [], [], [], []
    n = q = None
    c_by_completeness: dict[bool, bounds.CValue] = {}
    for _ in range(samples):
        arch = sampler(rng)
        dec = greedy_block_decomposition(arch, count_merging_only=count_merging_only)
        if n is None:
            n, q = arch.num_sites, float(arch.local_dim)
        if dec.complete not in c_by_completeness:
            q_eff = q if dec.complete else math.sqrt(q)
            c_by_completeness[dec.complete] = bounds.tightest_c(q_eff, t, source=c_source)
        c_val = c_by_completeness[dec.complete]
        e, j = _log_error(dec, t, c_val.value)
        exact.append(e)
        jensen.append(j)
        ks.append(dec.k)
        ells.append(dec.mean_block_size if dec.k else math.nan)
        if dec.k:
            kstars.append(bounds.log_budget(n, q, t, eps) / bounds.block_rate(c_val.value, dec.mean_block_size))
            covered = sum(len(arch.layers[li]) for s, e_, _ in dec.blocks for li in range(s, e_ + 1))
            gates_per_block.append(covered / dec.k)
    exact_arr, jensen_arr = np.asarray(exact), np.asarray(jensen)
    log_mean_exact = float(logsumexp(exact_arr) - math.log(samples))
    log_mean_jensen = float(logsumexp(jensen_arr) - math.log(samples))
    report = {
        "samples": samples,
        "t": t,
        "eps": eps,
        "c_used": {("complete" if k else "incomplete"): c.to_dict() for k, c in c_by_completeness.items()},
        "log_mean_error": log_mean_exact,
        "log_mean_error_mean_block": log_mean_jensen,
        "mean_log_error": float(exact_arr.mean()),
        "log_eps": math.log(eps),
        "certified": log_mean_exact <= math.log(eps),
        "certified_mean_block": log_mean_jensen <= math.log(eps),
        "k_mean": float(np.mean(ks)),
        "ell_bar_mean": float(np.nanmean(ells)) if any(k > 0 for k in ks) else None,
        "k_star_mean": float(np.mean(kstars)) if kstars else None,
        "notes": ["mean_log_error is a lower bound on log_mean_error and does not certify the average"],
    }
    if allow_conjectured:
        k_conj = bounds.conjectured_block_count(n, q, t, eps)
        gpb = float(np.mean(gates_per_block)) if gates_per_block else None
        report["conjectured"] = {
            "k_threshold": k_conj,
            "k_mean_meets": report["k_mean"] >= k_conj,
            "gates_per_connection": gpb,
            "implied_n_g": None if gpb is None else k_conj * gpb,
            "rigorous": False,
        }
    return report


def gate_sequence_sampler(
    edges: Sequence[tuple[int, int]], n_g: int, q: float = 2, layering: str = "packed", num_sites: int | None = None
) -> Callable[[np.random.Generator], Architecture]:
    """Sampler of ``n_g`` i.i.d. uniform gates over ``edges``."""
    edges = [tuple(int(s) for s in e) for e in edges]
    n = num_sites or _num_sites(edges)

    def draw(rng: np.random.Generator) -> Architecture:
        picks = rng.integers(0, len(edges), size=n_g)
        return gate_sequence_architecture([edges[j] for j in picks], n, q, layering)

    return draw


def threshold_curve(
    edges: Sequence[tuple[int, int]],
    n_gs: Sequence[int],
    t: int,
    eps: float,
    samples: int,
    seed: int,
    q: float = 2,
    layering: str = "packed",
) -> list[dict]:
    """Averaged log error bound as a function of gate count.

    Every ``n_g`` reuses the same seeded gate streams truncated to its length,
    so the curve is monotone in ``n_g`` sample by sample.
    """
    edges = [tuple(int(s) for s in e) for e in edges]
    n = _num_sites(edges)
    top = max(n_gs)
    rng = np.random.default_rng(seed)
    streams = [rng.integers(0, len(edges), size=top) for _ in range(samples)]
    rows = []
    for n_g in sorted(n_gs):
        it = iter(streams)

        def draw(_rng: np.random.Generator, n_g: int = n_g) -> Architecture:
            picks = next(it)[:n_g]
            return gate_sequence_architecture([edges[j] for j in picks], n, q, layering)

        rep = averaged_bound_check(draw, t, eps, samples, rng)
        rows.append({"n_g": n_g, "log_mean_error": rep["log_mean_error"], "k_mean": rep["k_mean"], "certified": rep["certified"]})
    return rows
