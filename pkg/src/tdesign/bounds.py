"""Closed-form design-depth bounds.

The chain used throughout is: a block with subleading singular value ``s``
shrinks the diamond-norm error by ``s``, and the error of ``k`` blocks is at most
``q^{2Nt} s^k``. Everything below is a way of choosing ``s`` from a catalog value
``C(q, t)`` of the 1D brickwork constant and the shape of the architecture.

All logarithms are natural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from tdesign.architecture import (
    Architecture,
    BlockDecomposition,
    greedy_block_decomposition,
    is_connected_block,
    is_complete,
)
from tdesign.decomposition import loglog_layer_bound


class BoundError(ValueError):
    """Inputs outside the domain of a bound formula."""


class FormulaDomainError(BoundError):
    """A closed form evaluated where it is not defined (negative radicand etc.)."""


# ------------------------------------------------------------------ C catalog

SOURCES = (
    "brandao_general",
    "brandao_q2plus",
    "haferkamp_q2",
    "hunterjones_t2_open",
    "hunterjones_t2_periodic",
    "largeq_leading",
    "conjectured",
)


@dataclass(frozen=True)
class CValue:
    """One catalog value of the brickwork constant ``C(q, t)``.

    ``rigorous`` is False for the large-q leading term and the conjectured
    value; the pipeline never picks those unless asked to.
    """

    value: float
    source: str
    assumptions: dict = field(default_factory=dict)
    rigorous: bool = True

    def __post_init__(self) -> None:
        if self.source not in SOURCES:
            raise BoundError(f"unknown C source {self.source!r}")
        if not (self.value > 0 and math.isfinite(self.value)):
            raise BoundError(f"C value must be positive and finite, got {self.value} ({self.source})")

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "source": self.source,
            "assumptions": dict(self.assumptions),
            "rigorous": self.rigorous,
        }


def _ceil_log(x: float, base: float) -> int:
    # Guard against 4t being an exact power of q with rounding noise.
    v = math.log(x) / math.log(base)
    r = round(v)
    return int(r) if abs(v - r) < 1e-12 else math.ceil(v)


def _brandao_q2plus(q: float, t: int) -> float:
    return 261500 * _ceil_log(4 * t, q) ** 2 * q**2 * t ** (5 + 3.1 / math.log(q))


def _brandao_general(q: float, t: int) -> float:
    q2 = q * q
    pre = 234 * (q2 + 1) * math.exp(2.5 * math.log(4) * (1 + math.log(q2 + 1)) / math.log(q) + 1)
    expo = 5 + 5 * (1 + math.log(1 + 1 / q2)) / (2 * math.log(q))
    return pre * _ceil_log(4 * t, q) ** 2 * t**expo


def _haferkamp_q2(t: int) -> float:
    alpha = 1e13
    return alpha / (2 * math.log(2)) * math.log(t) ** 5 * t ** (4 + 3 / math.sqrt(math.log2(t)))


def hunter_jones_rate(q: float) -> float:
    """``ln((q^2 + 1) / 2q)``, the per-layer decay rate of the t=2 brickwork."""
    return math.log((q * q + 1) / (2 * q))


def _check_qt(q: float, t: int) -> None:
    if not q > 1:
        raise BoundError(f"local dimension must exceed 1, got {q}")
    if int(t) != t or t < 2:
        raise BoundError(f"t must be an integer >= 2, got {t}")


def _is_integer(x: float, tol: float = 1e-9) -> bool:
    return abs(x - round(x)) < tol


def c_catalog(q: float, t: int) -> list[CValue]:
    """Every catalog value of ``C(q, t)`` whose assumptions admit ``(q, t)``.

    Log bases inside the general-t entries are taken as natural; this is
    recorded in each entry's assumptions. The conjectured value is always
    present and marked non-rigorous.
    """
    _check_qt(q, t)
    out: list[CValue] = []
    natural = {"log_base": "natural (assumed)"}
    if q >= 2:
        out.append(CValue(_brandao_q2plus(q, t), "brandao_q2plus", {"q_range": "q >= 2", "t_range": "t >= 2", "boundary": "any", **natural}))
    if _is_integer(q * q) and q * q >= 2:
        out.append(CValue(_brandao_general(q, t), "brandao_general", {"q_range": "integer q^2 >= 2", "t_range": "t >= 2", "boundary": "any", **natural}))
    if _is_integer(q) and round(q) == 2 and t >= 2:
        out.append(CValue(_haferkamp_q2(t), "haferkamp_q2", {"q_range": "q = 2", "t_range": "t >= 2", "boundary": "any"}))
    if t == 2:
        rate = hunter_jones_rate(q)
        out.append(CValue(1 / (2 * rate), "hunterjones_t2_open", {"q_range": "q > 1", "t_range": "t = 2", "boundary": "open"}))
        out.append(CValue(1 / (4 * rate), "hunterjones_t2_periodic", {"q_range": "q > 1", "t_range": "t = 2", "boundary": "periodic"}))
    if q > 2:
        out.append(
            CValue(1 / (4 * math.log(q / 2)), "largeq_leading", {"q_range": "q -> infinity", "t_range": "any", "boundary": "periodic", "note": "leading order only"}, rigorous=False)
        )
    out.append(
        CValue(1 / (4 * hunter_jones_rate(q)), "conjectured", {"q_range": "q > 1", "t_range": "any", "boundary": "periodic", "note": "conjectured sharp value"}, rigorous=False)
    )
    return out


def tightest_c(q: float, t: int, allow_conjectured: bool = False, source: str | None = None) -> CValue:
    """Smallest applicable catalog value, or the named ``source``."""
    cat = c_catalog(q, t)
    if source is not None:
        for c in cat:
            if c.source == source:
                return c
        raise BoundError(f"C source {source!r} does not apply at q={q}, t={t}")
    usable = [c for c in cat if c.rigorous or allow_conjectured]
    if not usable:
        raise BoundError(f"no rigorous C(q, t) value applies at q={q}, t={t}")
    return min(usable, key=lambda c: c.value)


# ------------------------------------------------------------- basic formulas


def s_1d(c: float) -> float:
    """Brickwork singular value implied by ``C``: ``exp(-1 / 2C)``."""
    if not c > 0:
        raise BoundError(f"C must be positive, got {c}")
    return math.exp(-1.0 / (2.0 * c))


def s_star_periodic(c: float, ell: float) -> float:
    """``1 - (1 - exp(-1/2C))^(ell - 1)`` for blocks of ``ell`` layers.

    Raises:
        BoundError: if ``ell < 2`` (a single layer never merges across layers)
            or ``C <= 0``.
    """
    if ell < 2:
        raise BoundError(f"block length must be >= 2, got {ell}")
    return 1.0 - (1.0 - s_1d(c)) ** (ell - 1)


def haar_frame_upper(d: float, t: int) -> float:
    """``min(t!, d^{2t})``."""
    return min(math.factorial(t), d ** (2 * t))


def tight_log_excess(num_sites: int, q: float, t: int) -> float:
    """``ln X`` with ``X = min(t!, q^{2t})^N - min(t!, (q^N)!)``.

    ``X`` bounds the number of non-unit singular values that can contribute to
    the frame potential. Evaluated in log space so large ``N`` does not
    overflow.
    """
    tf = math.factorial(t)
    log_a = num_sites * min(math.log(tf), 2 * t * math.log(q))
    # (q^N)! only matters when it is below t!; lgamma keeps it finite.
    qn_log = num_sites * math.log(q)
    if qn_log < math.log(tf) + 1 and _is_integer(q**num_sites):
        log_b = min(math.log(tf), math.lgamma(round(q**num_sites) + 1))
    else:
        log_b = math.log(tf)
    if log_a <= log_b:
        raise BoundError(f"no room for non-unit singular values at N={num_sites}, q={q}, t={t}")
    return log_a + math.log1p(-math.exp(log_b - log_a))


def log_budget(num_sites: int, q: float, t: int, eps: float, tight_log_term: bool = False) -> float:
    """Log of the ratio between the initial error prefactor and ``eps``.

    The default is ``2Nt ln q + ln(1/eps)``. The tight form keeps the frame
    potential count: ``Nt ln q + (1/2) ln X + ln(1/eps)``.
    """
    if not 0 < eps < 1:
        raise BoundError(f"eps must lie in (0, 1), got {eps}")
    if num_sites < 0:
        raise BoundError(f"N must be nonnegative, got {num_sites}")
    if tight_log_term:
        return num_sites * t * math.log(q) + 0.5 * tight_log_excess(num_sites, q, t) + math.log(1 / eps)
    return 2 * num_sites * t * math.log(q) + math.log(1 / eps)


def error_prefactor_log(num_sites: int, q: float, t: int, tight_log_term: bool = False) -> float:
    """Log of the prefactor multiplying ``s^k`` in the diamond-norm bound."""
    if tight_log_term:
        return num_sites * t * math.log(q) + 0.5 * tight_log_excess(num_sites, q, t)
    return 2 * num_sites * t * math.log(q)


def k_star(
    num_sites: int,
    q: float,
    t: int,
    eps: float,
    s_star: float,
    tight_log_term: bool = False,
) -> float:
    """Blocks (or periods) needed to push the error below ``eps``.

    Raises:
        BoundError: if ``s_star`` is outside ``(0, 1)`` or ``eps`` outside
            ``(0, 1)``.
    """
    if not 0 < s_star < 1:
        raise BoundError(f"s_star must lie in (0, 1), got {s_star}")
    return log_budget(num_sites, q, t, eps, tight_log_term) / math.log(1 / s_star)


def k_star_relaxed(num_sites: int, q: float, t: int, eps: float, c: float, ell: int) -> float:
    """``(4 max(C, 1/2))^(ell-1) (2Nt ln q + ln 1/eps)``, an upper bound on :func:`k_star`."""
    cbar = max(c, 0.5)
    return (4 * cbar) ** (ell - 1) * log_budget(num_sites, q, t, eps)


def x_expansion(num_sites: int) -> int:
    """``8 ceil(log2 floor(log2(N+1))) + 2``, the layer inflation of the integer-q route."""
    return loglog_layer_bound(num_sites)


def conjectured_block_count(num_sites: int, q: float, t: int, eps: float, form: str = "theorem") -> float:
    """Connected blocks sufficient under the two connection conjectures.

    ``form="theorem"`` divides by ``2 ln((q^2+1)/2q)``; ``form="open_brickwork"``
    divides by ``ln(1/s)`` with ``s = 2q/(q^2+1)``, the direct combination of
    the two conjectures, which is a factor two more conservative.
    """
    budget = log_budget(num_sites, q, t, eps)
    rate = hunter_jones_rate(q)
    if form == "theorem":
        return budget / (2 * rate)
    if form == "open_brickwork":
        return budget / rate
    raise BoundError(f"unknown conjectured form {form!r}")


def block_rate(c: float, ell: float) -> float:
    """``-ln(1 - (1 - exp(-1/2C))^(ell-1))``: the log-error removed by one block.

    Evaluated with ``expm1``/``log1p`` so long blocks keep a positive rate after
    ``s_star`` itself has rounded to 1.

    Raises:
        BoundError: if the rate underflows to zero.
    """
    if ell < 2:
        raise BoundError(f"block length must be >= 2, got {ell}")
    if not c > 0:
        raise BoundError(f"C must be positive, got {c}")
    gap = -math.expm1(-1.0 / (2.0 * c))
    rate = -math.log1p(-(gap ** (ell - 1)))
    if not rate > 0:
        raise BoundError(f"block rate underflows at C={c}, ell={ell}")
    return rate


def crossover_constant(short: int = 2, long: int = 4) -> float:
    """``C`` at which counting every block ties with counting only short blocks.

    For alternating connected ``short``- and ``long``-blocks, counting both with
    mean size ``(short+long)/2`` earns ``2 * rate(mean)`` per pair, while lumping
    the long blocks into the gaps earns ``rate(short)``. Counting both wins for
    small ``C``.
    """
    mean = (short + long) / 2

    def gap(c: float) -> float:
        return 2 * block_rate(c, mean) - block_rate(c, short)

    lo, hi = 0.02, 1e3
    if gap(lo) * gap(hi) > 0:
        raise BoundError(f"no crossover for blocks ({short}, {long})")
    return float(brentq(gap, lo, hi, xtol=1e-14, rtol=1e-14))


# ------------------------------------------------------------ bound pipeline

PATHS = ("complete_periodic", "incomplete_periodic", "incomplete_integer", "aperiodic", "conjectured")


@dataclass(frozen=True)
class BoundReport:
    """One evaluated design-depth bound with its provenance.

    ``k_star`` counts periods on periodic paths and connected blocks otherwise.
    ``d_star`` is a depth in layers: ``ell * ceil(k_star)`` on periodic paths,
    and ``ceil(k_star)`` times the observed layers per block otherwise.
    """

    theorem_path: str
    inputs: dict
    s_star: float
    k_star: float
    d_star: float
    c_used: CValue | None
    tight_log_term: bool
    rigorous: bool = True
    tightest: bool = False
    notes: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not 0 < self.s_star < 1:
            raise BoundError(f"s_star {self.s_star} outside (0, 1) on path {self.theorem_path}")
        if not self.k_star > 0:
            raise BoundError(f"k_star {self.k_star} must be positive on path {self.theorem_path}")

    @property
    def k_ceil(self) -> int:
        return math.ceil(self.k_star - 1e-12)

    def to_dict(self) -> dict:
        return {
            "theorem_path": self.theorem_path,
            "inputs": dict(self.inputs),
            "s_star": self.s_star,
            "k_star": self.k_star,
            "k_ceil": self.k_ceil,
            "d_star": self.d_star,
            "c_used": None if self.c_used is None else self.c_used.to_dict(),
            "tight_log_term": self.tight_log_term,
            "rigorous": self.rigorous,
            "tightest": self.tightest,
            "notes": list(self.notes),
        }


def diamond_chain_holds(report: BoundReport, rel_tol: float = 1e-9) -> bool:
    """Check ``prefactor * s_star^k_star <= eps (1 + rel_tol)`` in log space."""
    n, q, t, eps = (report.inputs[k] for k in ("N", "q", "t", "eps"))
    lhs = error_prefactor_log(n, q, t, report.tight_log_term) + report.k_star * math.log(report.s_star)
    return lhs <= math.log(eps) + math.log1p(rel_tol)


@dataclass(frozen=True)
class BoundOptions:
    allow_conjectured: bool = False
    tight_log_term: bool = False
    c_source: str | None = None
    count_merging_only: bool = False


def _period_info(arch: Architecture) -> tuple[int, bool] | None:
    """``(ell, complete)`` when the architecture has a connected period."""
    if arch.periodic_depth is None:
        return None
    ell = arch.periodic_depth
    if not is_connected_block(arch, 0, ell - 1):
        return None
    complete = all(is_complete(layer, arch.num_sites) for layer in arch.period())
    return ell, complete


def _try_c(q: float, t: int, opts: BoundOptions) -> CValue | None:
    try:
        return tightest_c(q, t, source=opts.c_source)
    except BoundError:
        return None


def _effective_period(arch: Architecture, opts: BoundOptions) -> int:
    if not opts.count_merging_only:
        return int(arch.periodic_depth)
    one = greedy_block_decomposition(arch.sublayers(0, arch.periodic_depth - 1), count_merging_only=True)
    return one.blocks[0][2] if one.k == 1 else int(arch.periodic_depth)


def _periodic_reports(arch: Architecture, t: int, eps: float, opts: BoundOptions) -> tuple[list[BoundReport], list[str]]:
    info = _period_info(arch)
    if info is None:
        return [], ["periodic paths need a periodic architecture whose period connects all sites"]
    period, complete = info
    ell = _effective_period(arch, opts)
    return periodic_reports(arch.num_sites, float(arch.local_dim), t, eps, ell, complete, opts, period)


def periodic_reports(
    n: int,
    q: float,
    t: int,
    eps: float,
    ell: int,
    complete: bool = True,
    options: BoundOptions | None = None,
    period: int | None = None,
) -> tuple[list[BoundReport], list[str]]:
    """Periodic-path reports for a connected period of ``ell`` counted layers.

    ``period`` is the number of layers per period used for the depth (defaults
    to ``ell``). Returns the reports and the reasons for any skipped path.
    """
    opts = options or BoundOptions()
    _check_qt(q, t)
    period = ell if period is None else period
    out: list[BoundReport] = []
    skipped: list[str] = []
    base = {"N": n, "q": q, "t": t, "eps": eps, "ell": ell, "period": period}
    notes = ("ell counts cluster-merging layers only",) if ell != period else ()
    if ell < 2:
        return out, ["a single layer connects all sites; layer-counting bounds do not apply"]

    def emit(path: str, c: CValue, rate: float, note: tuple[str, ...] = ()) -> None:
        s = math.exp(-rate)
        if not 0 < s < 1:
            skipped.append(f"{path}: singular value bound rounds to 1 in double precision")
            return
        k = log_budget(n, q, t, eps, opts.tight_log_term) / rate
        out.append(BoundReport(path, base, s, k, period * math.ceil(k - 1e-12), c, opts.tight_log_term, c.rigorous, notes=notes + note))

    if complete:
        c = _try_c(q, t, opts)
        if c is None:
            skipped.append(f"complete_periodic: no C({q}, {t}) in catalog")
        else:
            emit("complete_periodic", c, block_rate(c.value, ell))
    c_sqrt = _try_c(math.sqrt(q), t, opts)
    if c_sqrt is None:
        skipped.append(f"incomplete_periodic: no C(sqrt({q}), {t}) in catalog")
    else:
        emit("incomplete_periodic", c_sqrt, block_rate(c_sqrt.value, ell), ("C evaluated at sqrt(q)",))
    c = _try_c(q, t, opts)
    if c is None:
        skipped.append(f"incomplete_integer: no C({q}, {t}) in catalog")
    else:
        x = x_expansion(n)
        cbar = max(c.value, 0.5)
        # k = (4 Cbar)^(x ell - 1) * budget, i.e. a per-period rate of (4 Cbar)^-(x ell - 1).
        emit("incomplete_integer", c, math.exp(-(x * ell - 1) * math.log(4 * cbar)), (f"x(N)={x}",))
    return out, skipped


def _aperiodic_report(decomp: BlockDecomposition, t: int, eps: float, opts: BoundOptions) -> tuple[list[BoundReport], list[str]]:
    if decomp.k == 0:
        return [], ["aperiodic: no connected block"]
    n, q = decomp.num_sites, float(decomp.local_dim)
    ell_bar = decomp.mean_block_size
    if ell_bar < 2:
        return [], ["aperiodic: mean block size below 2"]
    q_eff = q if decomp.complete else math.sqrt(q)
    c = _try_c(q_eff, t, opts)
    if c is None:
        return [], [f"aperiodic: no C({q_eff}, {t}) in catalog"]
    rate = block_rate(c.value, ell_bar)
    s = math.exp(-rate)
    if not s < 1:
        return [], ["aperiodic: singular value bound rounds to 1 in double precision"]
    k = log_budget(n, q, t, eps, opts.tight_log_term) / rate
    layers_per_block = decomp.layer_total / decomp.k if decomp.layer_total else ell_bar
    inputs = {"N": n, "q": q, "t": t, "eps": eps, "ell_bar": ell_bar, "k": decomp.k}
    notes = [
        f"C evaluated at {'q' if decomp.complete else 'sqrt(q)'}",
        f"observed blocks {'suffice' if decomp.k >= k else 'do not suffice'} ({decomp.k} of {math.ceil(k - 1e-12)})",
    ]
    if decomp.count_merging_only:
        notes.append("ell counts cluster-merging layers only")
    rep = BoundReport("aperiodic", inputs, s, k, math.ceil(k - 1e-12) * layers_per_block, c, opts.tight_log_term, c.rigorous, notes=tuple(notes))
    return [rep], []


def _conjectured_report(n: int, q: float, t: int, eps: float, layers_per_block: float, opts: BoundOptions) -> BoundReport:
    rate = hunter_jones_rate(q)
    s = math.exp(-2 * rate)
    k = k_star(n, q, t, eps, s, opts.tight_log_term)
    c = CValue(1 / (4 * rate), "conjectured", {"note": "both connection conjectures assumed"}, rigorous=False)
    inputs = {"N": n, "q": q, "t": t, "eps": eps}
    return BoundReport("conjectured", inputs, s, k, math.ceil(k - 1e-12) * layers_per_block, c, opts.tight_log_term, False, notes=("conditional on unproven conjectures",))


@dataclass(frozen=True)
class PipelineResult:
    reports: tuple[BoundReport, ...]
    skipped: tuple[str, ...]
    decomposition: BlockDecomposition | None

    @property
    def tightest(self) -> BoundReport | None:
        for r in self.reports:
            if r.tightest:
                return r
        return None

    def to_dict(self) -> dict:
        best = self.tightest
        return {
            "reports": [r.to_dict() for r in self.reports],
            "tightest": None if best is None else best.theorem_path,
            "skipped": list(self.skipped),
            "decomposition": None if self.decomposition is None else self.decomposition.to_dict(),
        }


def bound_pipeline(
    source: Architecture | BlockDecomposition,
    t: int = 2,
    eps: float = 0.01,
    options: BoundOptions | None = None,
) -> PipelineResult:
    """Evaluate every applicable bound and mark the tightest.

    Periodic architectures whose period connects all sites get the periodic
    paths. Every input also gets the aperiodic path over its greedy (or given)
    block decomposition. The conjectured path is always emitted but is only
    eligible as tightest with ``allow_conjectured``.

    Raises:
        BoundError: if the input has no connected block at all.
    """
    opts = options or BoundOptions()
    _check_qt(float(source.local_dim), t)
    if not 0 < eps < 1:
        raise BoundError(f"eps must lie in (0, 1), got {eps}")
    reports: list[BoundReport] = []
    skipped: list[str] = []
    if isinstance(source, Architecture):
        decomp = greedy_block_decomposition(source, count_merging_only=opts.count_merging_only)
        rep, sk = _periodic_reports(source, t, eps, opts)
        reports += rep
        skipped += sk
    else:
        decomp = source
    if decomp.k == 0 and not reports:
        raise BoundError("the architecture never connects all sites; no bound applies")
    rep, sk = _aperiodic_report(decomp, t, eps, opts)
    reports += rep
    skipped += sk
    periodic = [r for r in reports if "period" in r.inputs]
    if periodic:
        per_block = periodic[0].inputs["period"]
    elif decomp.k:
        per_block = decomp.layer_total / decomp.k
    else:
        per_block = 1.0
    reports.append(_conjectured_report(decomp.num_sites, float(decomp.local_dim), t, eps, per_block, opts))

    eligible = [i for i, r in enumerate(reports) if r.rigorous or opts.allow_conjectured]
    if eligible:
        best = min(eligible, key=lambda i: reports[i].d_star)
        reports[best] = replace(reports[best], tightest=True)
    return PipelineResult(tuple(reports), tuple(skipped), decomp)


# ------------------------------------------------- hypercube and D-dim brickwork


def square_value(q: float) -> float:
    """Subleading singular value of the four-site square: ``2q^2/(q^2+1)^2``."""
    return 2 * q * q / (q * q + 1) ** 2


def two_cluster_formula(m: int, q: float, variant: str = "exact") -> float:
    """Layer-restricted value for two clusters of ``2^(m-1)`` sites joined by ``2^(m-1)`` gates.

    With ``y = q^(-2^m)`` and ``n = 2^(m-1)`` the exact value solves the
    four-state problem spanned by uniform identity and swap states:

        s_m^2 = (2 (1 + y) (2/(q^2+1))^n - 4 y) / (1 - y)^2

    At ``m = 2`` this reduces to :func:`square_value`. ``variant="printed"``
    evaluates the published closed form
    ``(1-y)^-2 sqrt(2 (1+y) (2/(q^2+1))^n - 8 y)``, which disagrees with direct
    numerics and has a negative radicand at ``m = 2``.

    Raises:
        FormulaDomainError: on a negative radicand or ``m < 2``.
    """
    if m < 2:
        raise FormulaDomainError(f"two-cluster formula needs m >= 2, got {m}")
    if not q > 1:
        raise BoundError(f"q must exceed 1, got {q}")
    y = q ** (-(2.0**m))
    n = 2 ** (m - 1)
    head = 2 * (1 + y) * (2 / (q * q + 1)) ** n
    if variant == "exact":
        rad = head - 4 * y
        if rad < 0:
            raise FormulaDomainError(f"negative radicand {rad} at m={m}, q={q}")
        return math.sqrt(rad) / (1 - y)
    if variant == "printed":
        rad = head - 8 * y
        if rad < 0:
            raise FormulaDomainError(f"negative radicand {rad} at m={m}, q={q} (printed form needs m >= 3)")
        return math.sqrt(rad) / (1 - y) ** 2
    raise BoundError(f"unknown variant {variant!r}")


def hypercube_layer_values(d: int, q: float) -> list[float]:
    """``[s_2, s_3, ..., s_d]``: layer-restricted values while building a ``d``-cube."""
    if d < 2:
        raise BoundError(f"hypercube dimension must be >= 2, got {d}")
    return [square_value(q)] + [two_cluster_formula(m, q) for m in range(3, d + 1)]


def hypercube_product_bound(d: int, q: float) -> float:
    """``sqrt(1 - prod_m (1 - s_m^2))`` over the layers of a ``d``-cube."""
    vals = np.asarray(hypercube_layer_values(d, q))
    return math.sqrt(1.0 - float(np.prod(1.0 - vals**2)))


def hypercube_tail_bound(q: float, variant: str = "valid") -> float:
    """Closed-form bound on the hypercube singular value, uniform in dimension.

    Uses ``s_m^2 <= 2 (16/15)^2 (2/q^2)^(4(m-2))`` for ``m >= 3``, whose sum is
    ``S = 2 (16/15)^2 * 16/(q^8 - 16)``. ``variant="valid"`` bounds the product
    with ``1 - x >= exp(-x/(1-x))``; ``variant="displayed"`` uses
    ``exp(-S)``, which is the form that evaluates to about 0.478 at ``q=2``
    but bounds the product from the wrong side.
    """
    if not q > 2 ** 0.5:
        raise BoundError(f"tail bound needs q^8 > 16, got q={q}")
    big_s = 2 * (16 / 15) ** 2 * 16 / (q**8 - 16)
    s2sq = square_value(q) ** 2
    if variant == "valid":
        if big_s >= 1:
            raise FormulaDomainError(f"tail sum {big_s} >= 1 at q={q}")
        decay = math.exp(-big_s / (1 - big_s))
    elif variant == "displayed":
        decay = math.exp(-big_s)
    else:
        raise BoundError(f"unknown variant {variant!r}")
    return math.sqrt(1 - (1 - s2sq) * decay)


def ddim_brickwork_bound(side: int, dims: int, q: float, eps: float, t: int = 2, c: float | None = None) -> float:
    """Depth bound for the ``D``-dimensional brickwork on ``side^D`` sites.

    ``d = 2D (4N ln q + ln 1/eps) / -ln(1 - (1 - exp(-1/2C))^2)`` with the
    periodic t=2 catalog value of ``C`` unless ``c`` is given.

    Raises:
        BoundError: for ``t != 2``, odd ``side`` or bad ``eps``.
    """
    if t != 2:
        raise BoundError(f"the D-dimensional brickwork bound is only available at t=2, got t={t}")
    if side < 2 or side % 2:
        raise BoundError(f"side length must be even and >= 2, got {side}")
    if dims < 1:
        raise BoundError(f"dimension must be >= 1, got {dims}")
    if c is None:
        c = tightest_c(q, 2, source="hunterjones_t2_periodic").value
    n = side**dims
    return 2 * dims * log_budget(n, q, 2, eps) / block_rate(c, 3)
