"""Command-line interface.

Every subcommand writes one JSON artifact ``{"manifest": ..., "result": ...}``
that validates against :mod:`tdesign.schemas`. Exit codes: 0 success, 2 invalid
input, 3 dimension guard exceeded, 4 iterative solver did not converge (the
artifact is still written).
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import asdict, dataclass
from importlib import metadata

import numpy as np

from tdesign import architecture as archmod
from tdesign import bounds, cluster_graph, decomposition, schemas, search, spectral

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_GUARD = 3
EXIT_NONCONVERGED = 4

SUBCOMMANDS = ("analyze", "gap", "frame-potential", "reduce", "decompose", "bound", "sweep", "anneal", "ensemble", "generate")


class InputError(ValueError):
    """Bad command-line input."""


@dataclass
class RunManifest:
    """Provenance embedded in every artifact.

    Identical manifests and inputs give byte-identical artifacts apart from
    ``timestamp``.
    """

    subcommand: str
    inputs: dict
    params: dict
    seed: int | None
    tool_version: str
    timestamp: str

    def to_dict(self) -> dict:
        return asdict(self)


def tool_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0.1.0"


# ------------------------------------------------------------------ input


def _read_json(path: str | None, stdio: bool, what: str) -> tuple[dict, dict]:
    """Load JSON from ``path`` or stdin; return the data and its input record."""
    if stdio and path is None:
        text = sys.stdin.read()
        origin = "<stdin>"
    elif path is None:
        raise InputError(f"--{what} is required (or use --stdio)")
    else:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise InputError(f"cannot read {what} file {path!r}: {exc}") from exc
        origin = path
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {origin}: {exc}") from exc
    # Artifacts written by this tool can be fed back in directly.
    if isinstance(data, dict) and "manifest" in data and "result" in data:
        data = data["result"]
    record = {"path": origin, "sha256": hashlib.sha256(text.encode()).hexdigest()}
    return data, record


def _load_arch(args: argparse.Namespace, inputs: dict) -> archmod.Architecture:
    data, record = _read_json(args.arch, args.stdio, "arch")
    inputs["arch"] = record
    return archmod.from_dict(data)


def _load_graph(args: argparse.Namespace, inputs: dict) -> cluster_graph.ClusterGraph:
    if args.graph is not None or (args.stdio and args.arch is None):
        data, record = _read_json(args.graph, args.stdio, "graph")
        inputs["graph"] = record
        return cluster_graph.ClusterGraph.from_dict(data)
    if args.arch is None:
        raise InputError("give --graph, or --arch with --layer")
    arch = _load_arch(args, inputs)
    if args.layer is None:
        raise InputError("--layer is required with --arch")
    merged = args.layer - 1 if args.merged_through is None else args.merged_through
    return cluster_graph.build_cluster_graph(arch, merged, args.layer)


def _layer_range(text: str | None) -> tuple[int, int] | None:
    if text is None:
        return None
    try:
        a, b = text.split(":")
        return int(a), int(b)
    except ValueError as exc:
        raise InputError(f"layer range must look like START:END, got {text!r}") from exc


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x]
    except ValueError as exc:
        raise InputError(f"expected a comma-separated list of numbers, got {text!r}") from exc


def _ints(text: str) -> list[int]:
    vals = _floats(text)
    if any(not float(v).is_integer() for v in vals):
        raise InputError(f"expected integers, got {text!r}")
    return [int(v) for v in vals]


# --------------------------------------------------------------- commands


def cmd_generate(args, inputs) -> tuple[dict, list[dict] | None]:
    kind = args.kind.replace("-", "_")
    if kind in ("brickwork1d", "brickwork_1d"):
        arch = archmod.brickwork_1d(args.n, args.bc, args.q)
    elif kind in ("brickwork_ddim", "brickworkddim"):
        arch = archmod.brickwork_ddim(args.side, args.dims, args.q)
    elif kind == "random":
        rng = np.random.default_rng(args.seed)
        arch = archmod.random_connected(args.n, args.layers, rng, args.q, complete=not args.incomplete)
    else:
        raise InputError(f"unknown architecture kind {args.kind!r}")
    return archmod.to_dict(arch), None


def cmd_gap(args, inputs):
    arch = _load_arch(args, inputs)
    rng_ = _layer_range(args.layers)
    op = spectral.transfer_matrix(arch, rng_, args.t, args.dim_guard)
    rep = spectral.subleading_singular_value(
        op, args.method, tol=args.tol, max_matvecs=args.max_matvecs, seed=args.seed
    )
    return {"report": rep.to_dict(), "layer_range": op.meta["layer_range"]}, None


def cmd_frame_potential(args, inputs):
    arch = _load_arch(args, inputs)
    out = {"k_periods": args.k, "t": args.t, "exact": None, "mc": None}
    if args.mode in ("exact", "both"):
        out["exact"] = spectral.frame_potential_exact(arch, args.k, args.t, min(args.dim_guard, spectral.DENSE_LIMIT))
    if args.mode in ("mc", "both"):
        out["mc"] = spectral.frame_potential_mc(arch, args.k, args.t, args.samples, np.random.default_rng(args.seed))
    return out, None


def cmd_reduce(args, inputs):
    g = _load_graph(args, inputs)
    red = cluster_graph.euler_reduce(g)
    return {"loop_sizes": list(red.loop_sizes), "graph": red.graph.to_dict(), "trace": red.trace.to_dict()}, None


def cmd_decompose(args, inputs):
    g = _load_graph(args, inputs)
    out = []
    if args.which in ("tree", "both"):
        out.append(decomposition.tree_decompose(g).to_dict())
    if args.which in ("loglog", "both"):
        out.append(decomposition.loglog_decompose(g).to_dict())
    return {"decompositions": out}, None


def _options(args) -> bounds.BoundOptions:
    return bounds.BoundOptions(
        allow_conjectured=args.allow_conjectured,
        tight_log_term=args.tight_log_term,
        c_source=args.c_source,
        count_merging_only=args.count_merging_only,
    )


def cmd_bound(args, inputs):
    arch = _load_arch(args, inputs)
    return bounds.bound_pipeline(arch, args.t, args.eps, _options(args)).to_dict(), None


def cmd_analyze(args, inputs):
    arch = _load_arch(args, inputs)
    dec = archmod.greedy_block_decomposition(arch, count_merging_only=args.count_merging_only)
    try:
        pipe = bounds.bound_pipeline(arch, args.t, args.eps, _options(args)).to_dict()
        reason = None
    except bounds.BoundError as exc:
        pipe, reason = None, str(exc)
    result = {"decomposition": dec.to_dict(), "bounds": pipe}
    if reason:
        result["bounds_unavailable"] = reason
    return result, None


def cmd_sweep(args, inputs):
    rows = []
    opts = _options(args)
    for n in _ints(args.n_list):
        for q in _floats(args.q_list):
            for t in _ints(args.t_list):
                for eps in _floats(args.eps_list):
                    for ell in _ints(args.ell_list):
                        reps, _ = bounds.periodic_reports(n, q, t, eps, ell, not args.incomplete, opts)
                        for r in reps:
                            rows.append({"N": n, "q": q, "t": t, "eps": eps, "ell": ell, "path": r.theorem_path, "s_star": r.s_star, "k_star": r.k_star, "d_star": r.d_star})
                    conj = bounds.conjectured_block_count(n, q, t, eps)
                    rows.append({"N": n, "q": q, "t": t, "eps": eps, "ell": None, "path": "conjectured", "s_star": math.exp(-2 * bounds.hunter_jones_rate(q)), "k_star": conj, "d_star": None})
    return {"rows": rows}, rows


def cmd_anneal(args, inputs):
    cfg = search.AnnealConfig(
        iterations=args.iterations,
        move_mean=args.move_mean,
        cooling=args.cooling,
        t_start=args.t_start,
        seed=args.seed,
        connectivity_policy=args.policy,
    )
    res = search.anneal_max_ssv(args.n, args.q, args.t, args.layers, cfg)
    csv_rows = [{"iteration": r["iteration"], "beta": r["beta"], "ssv": r["ssv"]} for r in res.trace]
    return res.to_dict(), csv_rows


def cmd_ensemble(args, inputs):
    if args.edges is not None:
        data, record = _read_json(args.edges, False, "edges")
        inputs["edges"] = record
        edges = [tuple(e) for e in data]
    elif args.graph_kind == "path":
        edges = archmod.path_graph(args.n)
    else:
        edges = archmod.complete_graph(args.n)
    rng = np.random.default_rng(args.seed)
    stats = search.ensemble_connection_stats(edges, args.trials, rng, n_g=args.n_g, q=args.q)
    result = {"stats": stats.to_dict(), "averaged": None, "coupon_collector_mean": None}
    if args.graph_kind == "path" and args.edges is None:
        result["coupon_collector_mean"] = search.coupon_collector_mean(len(edges))
    if args.n_g is not None:
        sampler = search.gate_sequence_sampler(edges, args.n_g, args.q)
        result["averaged"] = search.averaged_bound_check(sampler, args.t, args.eps, args.trials, rng, args.allow_conjectured)
    return result, [{"trial": i, "gates_to_connect": int(c)} for i, c in enumerate(stats.counts)]


COMMANDS = {
    "generate": cmd_generate,
    "gap": cmd_gap,
    "frame-potential": cmd_frame_potential,
    "reduce": cmd_reduce,
    "decompose": cmd_decompose,
    "bound": cmd_bound,
    "analyze": cmd_analyze,
    "sweep": cmd_sweep,
    "anneal": cmd_anneal,
    "ensemble": cmd_ensemble,
}


# ------------------------------------------------------------------ parser


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--t", type=int, default=2, help="moment order t (default 2)")
    p.add_argument("--eps", type=float, default=0.01, help="target diamond-norm error (default 0.01)")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--method", choices=("auto", "dense", "iterative"), default="auto", help="SSV solver (default auto: dense up to 4096)")
    p.add_argument("--dim-guard", type=int, default=spectral.DEFAULT_DIM_GUARD, help=f"largest operator dimension (default {spectral.DEFAULT_DIM_GUARD})")
    p.add_argument("--allow-conjectured", action="store_true", help="let conjectured bounds be marked tightest")
    p.add_argument("--stdio", action="store_true", help="read input JSON from stdin, write the artifact to stdout")
    p.add_argument("--out", help="artifact path (default stdout)")
    p.add_argument("--csv", help="also write tabular rows to this CSV file")
    return p


def _bound_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tight-log-term", action="store_true", help="use the frame-potential count instead of q^{2Nt}")
    p.add_argument("--c-source", choices=bounds.SOURCES, help="force one C(q,t) catalog entry")
    p.add_argument("--count-merging-only", action="store_true", help="count only cluster-merging layers in block sizes")


def _graph_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--graph", help="cluster graph JSON {weights, edges}")
    p.add_argument("--arch", help="architecture JSON (with --layer)")
    p.add_argument("--layer", type=int, help="layer whose cluster graph to use")
    p.add_argument("--merged-through", type=int, help="last layer merged into clusters (default layer-1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tdesign", description="Design-depth certificates for random circuit architectures.")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common()

    p = sub.add_parser("generate", parents=[common], help="emit an architecture JSON")
    p.add_argument("kind", help="brickwork1d, brickwork-ddim or random")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--bc", choices=("periodic", "open"), default="periodic")
    p.add_argument("--q", type=float, default=2)
    p.add_argument("--side", type=int, default=4)
    p.add_argument("--dims", type=int, default=2)
    p.add_argument("--layers", type=int, default=2)
    p.add_argument("--incomplete", action="store_true")

    p = sub.add_parser("gap", parents=[common], help="subleading singular value of a block")
    p.add_argument("--arch")
    p.add_argument("--layers", help="inclusive layer range START:END (default one period)")
    p.add_argument("--tol", type=float, default=spectral.DEFAULT_TOL, help="iterative residual tolerance")
    p.add_argument("--max-matvecs", type=int, default=spectral.DEFAULT_MAX_MATVECS, help="iterative matvec cap")

    p = sub.add_parser("frame-potential", parents=[common], help="exact and/or Monte Carlo frame potential")
    p.add_argument("--arch")
    p.add_argument("--k", type=int, default=1, help="number of periods")
    p.add_argument("--mode", choices=("exact", "mc", "both"), default="exact")
    p.add_argument("--samples", type=int, default=10_000)

    p = sub.add_parser("reduce", parents=[common], help="Euler reduction of a cluster graph to loops")
    _graph_flags(p)

    p = sub.add_parser("decompose", parents=[common], help="tree / log-log layer decompositions")
    _graph_flags(p)
    p.add_argument("--which", choices=("tree", "loglog", "both"), default="both")

    for name, helptext in (("bound", "evaluate design-depth bounds"), ("analyze", "block decomposition and bounds")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--arch")
        _bound_flags(p)

    p = sub.add_parser("sweep", parents=[common], help="bound formulas over a parameter grid")
    p.add_argument("--n-list", default="4,8,16")
    p.add_argument("--q-list", default="2")
    p.add_argument("--t-list", default="2")
    p.add_argument("--eps-list", default="0.01")
    p.add_argument("--ell-list", default="2")
    p.add_argument("--incomplete", action="store_true", help="skip the complete-layer path")
    _bound_flags(p)

    p = sub.add_parser("anneal", parents=[common], help="simulated annealing for large-SSV architectures")
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--q", type=float, default=2)
    p.add_argument("--layers", type=int, default=4)
    p.add_argument("--iterations", type=int, default=5000)
    p.add_argument("--cooling", type=float, default=0.999)
    p.add_argument("--t-start", type=float, default=None, help="start temperature (default automatic)")
    p.add_argument("--move-mean", type=float, default=1.0)
    p.add_argument("--policy", choices=("reject", "penalize"), default="reject")

    p = sub.add_parser("ensemble", parents=[common], help="random gate-location statistics")
    p.add_argument("--graph-kind", choices=("path", "complete"), default="path")
    p.add_argument("--edges", help="JSON list of edges (overrides --graph-kind)")
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--q", type=float, default=2)
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--n-g", type=int, default=None, help="also sample circuits of this many gates")
    return parser


# ----------------------------------------------------------------- output


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return buf.getvalue()


def _params(args: argparse.Namespace) -> dict:
    skip = {"command", "stdio", "out", "csv", "arch", "graph", "edges", "seed"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def run(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    """Run one subcommand and return its exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    inputs: dict = {}
    code = EXIT_OK
    try:
        result, rows = COMMANDS[args.command](args, inputs)
        if args.command == "gap" and not result["report"]["converged"]:
            code = EXIT_NONCONVERGED
            print("iterative solver did not converge; writing best estimate", file=stderr)
        if args.csv and rows is None:
            raise InputError(f"--csv is not supported by {args.command}")
    except spectral.DimensionGuardError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_GUARD
    except (
        InputError,
        archmod.ArchitectureError,
        cluster_graph.GraphError,
        bounds.BoundError,
        ValueError,
        KeyError,
        IndexError,
        TypeError,
    ) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INVALID
    manifest = RunManifest(
        subcommand=args.command,
        inputs=inputs,
        params=_params(args),
        seed=args.seed,
        tool_version=tool_version(),
        timestamp=_dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    )
    artifact = {"manifest": manifest.to_dict(), "result": result}
    schemas.validate_artifact(args.command, artifact)
    text = _dumps(artifact)
    if args.out and not args.stdio:
        _atomic_write(args.out, text)
    else:
        stdout.write(text)
    if args.csv:
        _atomic_write(args.csv, _csv_text(rows))
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
