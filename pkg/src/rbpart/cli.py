"""``rbpart`` command line: partition, improve, generate, oracle and bench.

Exit codes: 0 ok, 2 parse or input error, 3 infeasible result, 4 capacity
augmentation exhausted, 5 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import defaults
from .bench import (
    GpkcRecipe,
    brute_force_optimum,
    generate_gpkc,
    run_experiment,
    summarize,
    table_recipes,
    table_reference,
    write_records_csv,
    write_summary_csv,
)
from .driver import REFINE_MODES, PipelineConfig, partition, refine_partition
from .graph import NO_FIXED, CapacityBound, InputError, WeightedGraph, expand_hypergraph, labels_cut
from .io import load_fixed, load_graph, load_hypergraph, read_partition, save_graph, write_partition
from .refine import repair_toward_feasibility
from .rounding import AugmentationExhausted, RoundingConfig
from .smcg import SolverConfig

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3
EXIT_EXHAUSTED = 4
EXIT_INTERNAL = 5

log = logging.getLogger("rbpart")


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _emit(report: dict, out: Path | None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True, default=_json_default)
    if out is None:
        print(text)
    else:
        out.write_text(text + "\n", encoding="utf-8")


def _load(args) -> WeightedGraph:
    if args.format == "hmetis":
        return expand_hypergraph(load_hypergraph(args.graph))
    return load_graph(args.graph)


def _capacity_row(args, g: WeightedGraph) -> np.ndarray:
    if not args.capacity:
        raise InputError("--capacity is required (one value per resource)")
    row = np.array(args.capacity, dtype=np.int64)
    if row.shape != (g.m,):
        raise InputError(f"--capacity needs {g.m} value(s), got {len(row)}")
    return row


def _pipeline_config(args) -> PipelineConfig:
    solver = SolverConfig(epsilon=args.eps, max_iters=args.max_iters)
    rounding = RoundingConfig(planes=args.planes, keep=args.keep)
    refine = "strict" if args.strict else args.refine
    return PipelineConfig(rho=args.rho, solver=solver, rounding=rounding, seed=args.seed,
                          restarts=args.restarts, refine=refine)


def _part_usage(g: WeightedGraph, labels: np.ndarray, k: int) -> np.ndarray:
    return np.array([g.vertex_weights[labels == p].sum(axis=0) for p in range(k)], dtype=np.int64)


# --- subcommands ----------------------------------------------------------


def cmd_partition(args) -> int:
    g = _load(args)
    row = _capacity_row(args, g)
    fixed = load_fixed(args.fixed, g.n) if args.fixed else NO_FIXED
    cfg = _pipeline_config(args)
    try:
        forest = partition(g, CapacityBound.uniform(row), fixed, cfg)
    except AugmentationExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EXHAUSTED
    out_dir = Path(args.out) if args.out else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        write_partition(forest.labels, out_dir / "partition.txt")
    report = {
        "command": "partition",
        "graph": str(args.graph),
        "n": g.n,
        "seed": args.seed,
        "restarts": args.restarts,
        "refine_mode": cfg.refine,
        "strict_refine": cfg.single_pair,
        "rho": cfg.rho,
        "cut": forest.cut_total,
        "feasible": forest.feasible,
        "n_parts": forest.n_parts,
        "usage": forest.usage,
        "capacities": forest.capacities,
        "augmentations": forest.augmentation_log,
        "solver": {
            "iterations": forest.stats["solver_iters"],
            "status": forest.stats["solver_status"],
            "case_counts": forest.stats["case_counts"],
            "accel_hits": forest.stats["accel_hits"],
        },
        "stats": forest.stats,
        "tree": forest.provenance.as_dict(),
    }
    _emit(report, out_dir / "report.json" if out_dir else None)
    if not forest.feasible:
        print("error: some parts exceed their capacity", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def _repair_parts(g: WeightedGraph, labels: np.ndarray, row: np.ndarray, immovable) -> np.ndarray | None:
    """Push overfull parts under ``row`` by pairing each with the roomiest other part."""
    k = int(labels.max()) + 1
    U = np.vstack([row, row])
    blocked = set(int(v) for v in immovable)
    for _ in range(k * k):
        usage = _part_usage(g, labels, k)
        over = np.flatnonzero(np.any(usage > row, axis=1))
        if not len(over):
            return labels
        i = int(over[0])
        slack = (row - usage).min(axis=1)
        for j in np.argsort(-slack, kind="stable"):
            j = int(j)
            if j == i:
                continue
            members = np.flatnonzero((labels == i) | (labels == j))
            sub = g.induced(members)
            local_fixed = [p for p, v in enumerate(members) if int(v) in blocked]
            res = repair_toward_feasibility((labels[members] == i).astype(np.int8), sub, U, local_fixed)
            if res.steps:
                labels = labels.copy()
                labels[members] = np.where(res.y1 == 1, i, j)
            if res.success:
                break
        else:
            return None
    return None


def cmd_improve(args) -> int:
    g = _load(args)
    row = _capacity_row(args, g)
    labels = read_partition(args.partition, g.n)
    k = int(labels.max()) + 1
    if k < 2:
        raise InputError("partition has a single part; nothing to improve")
    if set(np.unique(labels).tolist()) != set(range(k)):
        raise InputError("partition part ids must be contiguous starting at 1")
    fixed = load_fixed(args.fixed, g.n) if args.fixed else NO_FIXED
    immovable = sorted(fixed.f1 | fixed.f2)
    before = labels_cut(g, labels)
    repaired = False
    if np.any(_part_usage(g, labels, k) > row):
        if not args.repair:
            print("error: input partition violates the capacities (pass --repair to fix it first)", file=sys.stderr)
            return EXIT_INFEASIBLE
        fixed_labels = _repair_parts(g, labels, row, immovable)
        if fixed_labels is None:
            print("error: repair could not reach a feasible partition", file=sys.stderr)
            return EXIT_INFEASIBLE
        labels, repaired = fixed_labels, True
    start = labels_cut(g, labels)
    mode = "strict" if args.strict else args.refine
    caps = np.tile(row, (k, 1))
    labels, stats = refine_partition(g, labels, caps, immovable, mode=mode, rng=args.seed)
    after = labels_cut(g, labels)
    out_dir = Path(args.out) if args.out else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        write_partition(labels, out_dir / "partition.txt")
    report = {
        "command": "improve",
        "graph": str(args.graph),
        "n_parts": k,
        "cut_before": before,
        "cut_after": after,
        "repaired": repaired,
        "refine": stats,
        "strict_refine": mode == "strict",
        "usage": _part_usage(g, labels, k),
        "feasible": bool(np.all(_part_usage(g, labels, k) <= row)),
    }
    if repaired:
        report["cut_after_repair"] = start
    _emit(report, out_dir / "report.json" if out_dir else None)
    return EXIT_OK


def cmd_generate(args) -> int:
    recipe = GpkcRecipe(args.n, args.prob, args.capacity_value or 0, args.seed)
    g, _ = generate_gpkc(recipe)
    save_graph(g, args.out)
    _emit({"command": "generate", "instance": recipe.instance, "n": g.n, "edges": g.num_edges,
           "total_vertex_weight": int(g.vertex_weights.sum())}, None)
    return EXIT_OK


def cmd_oracle(args) -> int:
    g = _load(args)
    row = _capacity_row(args, g)
    fixed = load_fixed(args.fixed, g.n) if args.fixed else NO_FIXED
    res = brute_force_optimum(g, CapacityBound.uniform(row), fixed)
    if res is None:
        print("error: no feasible bipartition exists", file=sys.stderr)
        return EXIT_INFEASIBLE
    if args.out:
        write_partition(1 - res.y1.astype(np.int64), args.out)
    _emit({"command": "oracle", "cut": res.cut, "evaluated": res.evaluated,
           "side1": (np.flatnonzero(res.y1) + 1).tolist()}, None)
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = _pipeline_config(args)
    if args.table:
        recipes = table_recipes(args.table, args.n, args.instance_seed)
        reference = table_reference(args.table, args.n, args.instance_seed)
    else:
        if args.capacity_value is None or args.prob is None:
            raise InputError("bench needs --table or both --prob and --capacity-value")
        recipes = [GpkcRecipe(args.n, args.prob, args.capacity_value, args.instance_seed)]
        reference = None
    records = run_experiment(recipes, cfg, repeats=args.repeats)
    rows = summarize(records, reference)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_records_csv(records, out_dir / "runs.csv")
    write_summary_csv(rows, out_dir / "summary.csv")
    _emit({"command": "bench", "rows": rows}, None)
    return EXIT_OK


# --- parser ---------------------------------------------------------------


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--rho", type=float, default=defaults.RHO, help="balance penalty factor")
    p.add_argument("--eps", type=float, default=defaults.EPSILON, help="gradient tolerance")
    p.add_argument("--max-iters", type=int, default=defaults.MAX_ITERS)
    p.add_argument("--planes", type=int, default=defaults.PLANES, help="random hyperplanes per rounding")
    p.add_argument("--keep", type=int, default=defaults.KEEP, help="top candidates screened first")
    p.add_argument("--restarts", type=int, default=1, help="seeded pipeline runs, best kept")
    p.add_argument("--refine", choices=REFINE_MODES, default="sweep")
    p.add_argument("--paper-strict", dest="strict", action="store_true", help="refine a single random pair of parts")


def _add_graph_flags(p: argparse.ArgumentParser, capacity: bool = True) -> None:
    p.add_argument("graph", help="graph (edge list) or hypergraph (hMETIS) file")
    p.add_argument("--format", choices=("edgelist", "hmetis"), default="edgelist")
    p.add_argument("--fixed", help="hMETIS fix file (-1 free, 0 side 1, 1 side 2)")
    if capacity:
        p.add_argument("--capacity", type=int, nargs="+", help="capacity per resource, one value each")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rbpart", description="Capacity-constrained graph partitioning.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("partition", help="partition a graph under capacity limits")
    _add_graph_flags(p)
    _add_solver_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="directory for partition.txt and report.json (default: report to stdout)")
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("improve", help="locally improve an existing partition")
    _add_graph_flags(p)
    p.add_argument("--partition", required=True, help="partition file: lines 'vertex part', 1-based")
    p.add_argument("--repair", action="store_true", help="repair an infeasible input first")
    p.add_argument("--refine", choices=REFINE_MODES, default="sweep")
    p.add_argument("--paper-strict", dest="strict", action="store_true", help="refine a single random pair of parts")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_improve)

    p = sub.add_parser("generate", help="write a random GPKC instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--prob", type=float, required=True, help="edge probability")
    p.add_argument("--capacity-value", type=int, default=None, help="recorded in the instance recipe")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("oracle", help="exhaustive optimum for small graphs")
    _add_graph_flags(p)
    p.add_argument("--out", help="write the optimal bipartition here")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("bench", help="repeated runs on generated instances")
    _add_solver_flags(p)
    p.add_argument("--table", help="published table: 1/rand20, 2/rand50, 3/rand80")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--prob", type=float)
    p.add_argument("--capacity-value", type=int)
    p.add_argument("--instance-seed", type=int, default=0)
    p.add_argument("--repeats", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="directory for runs.csv and summary.csv")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    t0 = time.perf_counter()
    try:
        code = args.func(args)
    except (InputError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001 - last-resort guard for the exit-code contract
        log.exception("internal error")
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    log.debug("%s finished in %.3f s", args.command, time.perf_counter() - t0)
    return code


if __name__ == "__main__":
    sys.exit(main())
