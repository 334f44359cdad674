"""Random GPKC instances, an exhaustive oracle and a small experiment runner."""

from __future__ import annotations

import csv
import json
import time
from dataclasses import asdict, dataclass, field
from importlib import resources
from typing import Iterable, Optional, Sequence

import numpy as np

from .driver import PipelineConfig, partition_once
from .graph import NO_FIXED, CapacityBound, FixedAssignment, InputError, WeightedGraph
from .rounding import AugmentationExhausted

ORACLE_LIMIT = 24
EDGE_WEIGHT_MAX = 100
VERTEX_WEIGHT_MAX = 1000


@dataclass(frozen=True)
class GpkcRecipe:
    n: int
    edge_prob: float
    capacity: int
    seed: int = 0
    edge_weight_max: int = EDGE_WEIGHT_MAX
    vertex_weight_max: int = VERTEX_WEIGHT_MAX
    name: Optional[str] = None

    def __post_init__(self):
        if not 0 < self.edge_prob <= 1:
            raise ValueError("edge_prob must lie in (0, 1]")
        if self.edge_weight_max < 1 or self.vertex_weight_max < 1:
            raise ValueError("weight ranges must be nonempty")
        if self.n < 1:
            raise ValueError("n must be positive")

    @property
    def instance(self) -> str:
        if self.name:
            return self.name
        return f"GPKCrand{round(self.edge_prob * 100)}_n{self.n}_s{self.seed}"


def generate_gpkc(recipe: GpkcRecipe) -> tuple[WeightedGraph, CapacityBound]:
    """Each pair becomes an edge with probability ``edge_prob``; integer weights start at 1."""
    rng = np.random.default_rng(recipe.seed)
    rows, cols = np.triu_indices(recipe.n, k=1)
    keep = rng.random(len(rows)) < recipe.edge_prob
    rows, cols = rows[keep], cols[keep]
    weights = rng.integers(1, recipe.edge_weight_max + 1, size=len(rows))
    vw = rng.integers(1, recipe.vertex_weight_max + 1, size=(recipe.n, 1))
    g = WeightedGraph(recipe.n, rows, cols, weights.astype(float), vw)
    return g, CapacityBound.uniform([recipe.capacity])


@dataclass
class OracleResult:
    cut: float
    y1: np.ndarray
    evaluated: int


def brute_force_optimum(
    g: WeightedGraph,
    U,
    fixed: FixedAssignment = NO_FIXED,
    limit: int = ORACLE_LIMIT,
) -> Optional[OracleResult]:
    """Exhaustive minimum-cut feasible bipartition, or ``None`` if none exists."""
    if g.n > limit:
        raise InputError(f"oracle refuses n={g.n}: enumeration is limited to n <= {limit}")
    limits = U.limits if isinstance(U, CapacityBound) else np.atleast_2d(np.asarray(U))
    if limits.shape[0] == 1:
        limits = np.vstack([limits, limits])
    fixed.validate(g.n)
    free = fixed.free_vertices(g.n)
    nf = len(free)
    B = g.vertex_weights
    total = B.sum(axis=0)
    base = np.zeros(g.n, dtype=np.int8)
    base[list(fixed.f1)] = 1
    W = g.adjacency.toarray()

    best_cut, best_code = np.inf, None
    chunk = 1 << min(nf, 16)
    bits = np.arange(nf, dtype=np.int64)
    for start in range(0, 1 << nf, chunk):
        codes = np.arange(start, min(start + chunk, 1 << nf), dtype=np.int64)
        Y = np.tile(base, (len(codes), 1))
        Y[:, free] = (codes[:, None] >> bits) & 1
        usage1 = Y @ B
        ok = np.all(usage1 <= limits[0], axis=1) & np.all(total - usage1 <= limits[1], axis=1)
        if not ok.any():
            continue
        Yf = Y[ok].astype(float)
        # cut = sum_{i<j} w_ij [y_i != y_j] = y'W(1-y)
        cuts = np.einsum("ki,ki->k", Yf @ W, 1.0 - Yf)
        k = int(np.argmin(cuts))
        if cuts[k] < best_cut:
            best_cut, best_code = float(cuts[k]), Y[ok][k].copy()
    if best_code is None:
        return None
    return OracleResult(best_cut, best_code, 1 << nf)


def gap_percent(ours: float, reference: float) -> float:
    """Relative difference ``(ours - reference) / reference`` in percent."""
    return (ours - reference) / reference * 100.0


@dataclass
class RunRecord:
    instance: str
    n: int
    edge_prob: float
    capacity: int
    seed: int
    cut: float
    cpu_s: float
    status: str
    iters: int
    parts: int = 0
    feasible: bool = False
    case_counts: dict = field(default_factory=dict)
    labels: Optional[list] = None


CSV_FIELDS = ["instance", "n", "edge_prob", "capacity", "seed", "cut", "cpu_s", "status", "iters"]


def run_experiment(
    recipes: Iterable[GpkcRecipe],
    cfg: PipelineConfig = PipelineConfig(),
    repeats: int = 20,
    keep_labels: bool = False,
) -> list[RunRecord]:
    """``repeats`` seeded pipeline runs per recipe; failures become status rows."""
    records = []
    for recipe in recipes:
        g, U = generate_gpkc(recipe)
        for r in range(repeats):
            seed = cfg.seed + r
            t0 = time.perf_counter()
            try:
                forest = partition_once(g, U, NO_FIXED, cfg, seed=seed)
            except AugmentationExhausted:
                records.append(
                    RunRecord(recipe.instance, recipe.n, recipe.edge_prob, recipe.capacity, seed, float("nan"),
                              round(time.perf_counter() - t0, 3), "AugmentationExhausted", 0)
                )
                continue
            except Exception as exc:  # noqa: BLE001 - one bad run must not sink the table
                records.append(
                    RunRecord(recipe.instance, recipe.n, recipe.edge_prob, recipe.capacity, seed, float("nan"),
                              round(time.perf_counter() - t0, 3), f"error:{type(exc).__name__}", 0)
                )
                continue
            elapsed = time.perf_counter() - t0
            statuses = forest.stats["solver_status"]
            status = "ok" if forest.feasible else "infeasible"
            if statuses.get("MaxIters"):
                status += "*"
            records.append(
                RunRecord(
                    recipe.instance, recipe.n, recipe.edge_prob, recipe.capacity, seed,
                    forest.cut_total, round(elapsed, 3), status, forest.stats["solver_iters"],
                    forest.n_parts, forest.feasible, dict(forest.stats["case_counts"]),
                    forest.labels.tolist() if keep_labels else None,
                )
            )
    return records


def summarize(records: Sequence[RunRecord], reference: Optional[dict] = None) -> list[dict]:
    """Per (instance, capacity): best feasible cut, mean time, optional Gap column."""
    groups: dict = {}
    for rec in records:
        groups.setdefault((rec.instance, rec.capacity), []).append(rec)
    rows = []
    for (instance, capacity), recs in groups.items():
        feasible = [r.cut for r in recs if r.feasible]
        row = {
            "instance": instance,
            "n": recs[0].n,
            "edge_prob": recs[0].edge_prob,
            "capacity": capacity,
            "runs": len(recs),
            "feasible_runs": len(feasible),
            "min_cut": min(feasible) if feasible else float("nan"),
            "mean_cpu_s": round(float(np.mean([r.cpu_s for r in recs])), 3),
        }
        if reference is not None and (instance, capacity) in reference and feasible:
            row["reference_cut"] = reference[(instance, capacity)]
            row["gap_pct"] = round(gap_percent(row["min_cut"], row["reference_cut"]), 4)
        rows.append(row)
    return rows


def write_records_csv(records: Sequence[RunRecord], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS, extrasaction="ignore")
        writer.writeheader()
        for rec in records:
            writer.writerow(asdict(rec))


def write_summary_csv(rows: Sequence[dict], path) -> None:
    fields = ["instance", "n", "edge_prob", "capacity", "runs", "feasible_runs", "min_cut", "mean_cpu_s"]
    if any("gap_pct" in r for r in rows):
        fields += ["reference_cut", "gap_pct"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, extrasaction="ignore")
        writer.writeheader()
        writer.writerows(rows)


def load_tables() -> dict:
    """Published capacity bounds and cut values for the rand20/50/80 GPKC tables."""
    text = resources.files("rbpart").joinpath("data/gpkc_tables.json").read_text(encoding="utf-8")
    return json.loads(text)


TABLES = {"1": "rand20", "2": "rand50", "3": "rand80", "rand20": "rand20", "rand50": "rand50", "rand80": "rand80"}


def table_recipes(table: str, n: int, seed: int = 0) -> list[GpkcRecipe]:
    """One recipe per published capacity bound; all share one generated graph."""
    key = TABLES.get(str(table))
    if key is None:
        raise InputError(f"unknown table {table!r}")
    rows = load_tables()[key].get(str(n))
    if rows is None:
        raise InputError(f"table {key} has no rows for n={n}")
    prob = int(key[4:]) / 100
    return [GpkcRecipe(n, prob, row["bound"], seed) for row in rows]


def table_reference(table: str, n: int, seed: int = 0, column: str = "vc_cut") -> dict:
    key = TABLES[str(table)]
    recipes = table_recipes(table, n, seed)
    rows = load_tables()[key][str(n)]
    return {(r.instance, r.capacity): row[column] for r, row in zip(recipes, rows)}
