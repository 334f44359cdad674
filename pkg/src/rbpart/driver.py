"""Multi-way partitioning by recursive bisection.

Each bisection solves the relaxed model, rounds it, and recurses into every
side whose weight only fit after the capacities were scaled up.  Children of
a part inherit that part's capacity row for both of their sides.  The final
parts are then polished pairwise with :func:`rbpart.refine.improve`.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace
from functools import partial
from typing import Optional

import numpy as np

from . import defaults
from .graph import (
    NO_FIXED,
    CapacityBound,
    FixedAssignment,
    InputError,
    WeightedGraph,
    build_laplacian,
    labels_cut,
)
from .model import SQUARES, eliminate_and_penalize, value_and_gradient
from .refine import improve_labels, pick_random_pair
from .rounding import AugmentationExhausted, RoundingConfig, round_and_select
from .smcg import SolverConfig, solve

log = logging.getLogger(__name__)

REFINE_MODES = ("sweep", "adjacent", "strict")


@dataclass(frozen=True)
class PipelineConfig:
    rho: float = defaults.RHO
    balance: str = SQUARES
    solver: SolverConfig = SolverConfig()
    rounding: RoundingConfig = RoundingConfig()
    seed: int = 0
    restarts: int = 1
    refine: str = "sweep"
    refine_rounds: int = 1
    max_depth: int = defaults.MAX_DEPTH
    max_refine_sweeps: int = defaults.MAX_REFINE_SWEEPS

    def __post_init__(self):
        if self.refine not in REFINE_MODES:
            raise ValueError(f"refine must be one of {REFINE_MODES}")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")

    @property
    def single_pair(self) -> bool:
        return self.refine == "strict"


@dataclass
class Node:
    """One step of the bisection tree."""

    vertices: np.ndarray
    capacity: np.ndarray
    depth: int = 0
    augmented: bool = False
    overflow: bool = False
    part: Optional[int] = None
    children: list = field(default_factory=list)
    solver_status: Optional[str] = None
    solver_iters: int = 0

    def leaves(self):
        if not self.children:
            yield self
        for c in self.children:
            yield from c.leaves()

    def as_dict(self) -> dict:
        d = {
            "size": int(len(self.vertices)),
            "capacity": self.capacity.tolist(),
            "depth": self.depth,
            "augmented": self.augmented,
        }
        if self.part is not None:
            d["part"] = self.part + 1
            d["overflow"] = self.overflow
        if self.solver_status is not None:
            d["solver"] = {"status": self.solver_status, "iters": self.solver_iters}
        if self.children:
            d["children"] = [c.as_dict() for c in self.children]
        return d


@dataclass
class PartitionForest:
    parts: list
    capacities: np.ndarray
    usage: np.ndarray
    labels: np.ndarray
    cut_total: float
    provenance: Node
    augmentation_log: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    @property
    def n_parts(self) -> int:
        return len(self.parts)

    @property
    def feasible(self) -> bool:
        return bool(np.all(self.usage <= self.capacities))

    def summary(self) -> dict:
        return {
            "cut_total": self.cut_total,
            "n_parts": self.n_parts,
            "feasible": self.feasible,
            "part_sizes": [int(len(p)) for p in self.parts],
            "usage": self.usage.tolist(),
            "capacities": self.capacities.tolist(),
            "augmentations": self.augmentation_log,
            "stats": self.stats,
        }


class _Run:
    """State for one seeded pass of the pipeline."""

    def __init__(self, g: WeightedGraph, fixed: FixedAssignment, cfg: PipelineConfig, seed: int):
        self.g = g
        self.fixed = fixed
        self.cfg = cfg
        self.rng = np.random.default_rng(seed)
        self.stats = {
            "bisections": 0,
            "solver_iters": 0,
            "solver_status": {},
            "case_counts": {1: 0, 2: 0, 3: 0, 4: 0},
            "accel_hits": 0,
            "rounding_stages": {},
        }
        self.augmentation_log = []

    def bisect(self, vertices: np.ndarray, U2: np.ndarray, fixed: FixedAssignment, depth: int) -> Node:
        g = self.g
        node = Node(vertices, U2, depth)
        sub = g if len(vertices) == g.n else g.induced(vertices)
        q = eliminate_and_penalize(build_laplacian(sub), fixed, self.cfg.rho, self.cfg.balance)
        theta = self.rng.uniform(0.0, 2.0 * np.pi, size=q.dim)
        if q.dim:
            rep = solve(partial(value_and_gradient, q), theta, self.cfg.solver)
            theta = rep.theta_star
            node.solver_status, node.solver_iters = rep.status.value, rep.iters
            st = self.stats
            st["solver_iters"] += rep.iters
            st["solver_status"][rep.status.value] = st["solver_status"].get(rep.status.value, 0) + 1
            st["accel_hits"] += rep.accel_hits
            for c, k in rep.case_counts.items():
                st["case_counts"][c] += k
        self.stats["bisections"] += 1

        rcfg = replace(self.cfg.rounding, seed=int(self.rng.integers(2**63)))
        try:
            out = round_and_select(theta, q, sub, U2, rcfg)
        except AugmentationExhausted as exc:
            exc.vertices = vertices
            exc.depth = depth
            raise
        self.stats["rounding_stages"][out.stage] = self.stats["rounding_stages"].get(out.stage, 0) + 1
        best = out.best
        node.augmented = out.augmented[0]
        if node.augmented:
            self.augmentation_log.append(
                {
                    "depth": depth,
                    "size": int(len(vertices)),
                    "capacity": U2.tolist(),
                    "augmented_to": out.capacities.tolist(),
                    "overflow": list(out.overflow[0]),
                }
            )

        for side, y in enumerate((best.y1, best.y2)):
            local = np.flatnonzero(y)
            if not len(local):
                continue
            child_vertices = vertices[local]
            row = U2[side]
            if not out.overflow[0][side]:
                node.children.append(Node(child_vertices, np.vstack([row, row]), depth + 1))
                continue
            stuck = len(local) == len(vertices) or len(local) == 1 or depth + 1 >= self.cfg.max_depth
            if stuck:
                node.children.append(Node(child_vertices, np.vstack([row, row]), depth + 1, overflow=True))
                continue
            # everything fixed in this side came from the same group; keep it together
            pinned = fixed.f1 if side == 0 else fixed.f2
            position = {int(v): k for k, v in enumerate(local)}
            child_fixed = FixedAssignment(frozenset(position[v] for v in pinned))
            node.children.append(self.bisect(child_vertices, np.vstack([row, row]), child_fixed, depth + 1))
        return node

    def refine(self, labels: np.ndarray, capacities: np.ndarray, infeasible: set) -> np.ndarray:
        cfg = self.cfg
        labels, stats = refine_partition(
            self.g, labels, capacities, sorted(self.fixed.f1 | self.fixed.f2),
            mode=cfg.refine, rng=self.rng, rounds=cfg.refine_rounds,
            max_sweeps=cfg.max_refine_sweeps, skip=infeasible,
        )
        self.stats["refine"] = stats
        return labels


def refine_partition(
    g: WeightedGraph,
    labels,
    capacities,
    immovable=(),
    *,
    mode: str = "sweep",
    rng=None,
    rounds: int = 1,
    max_sweeps: int = defaults.MAX_REFINE_SWEEPS,
    skip=(),
) -> tuple[np.ndarray, dict]:
    """Pairwise local improvement of a multi-way labelling.

    ``mode="sweep"`` revisits every pair of touching parts until none improves,
    ``"adjacent"`` visits consecutive part indices once, and ``"strict"`` picks a
    single random pair.  Parts listed in ``skip`` are left alone.
    """
    if mode not in REFINE_MODES:
        raise InputError(f"refine mode must be one of {REFINE_MODES}")
    labels = np.array(labels, dtype=np.int64)
    capacities = np.atleast_2d(np.asarray(capacities, dtype=np.int64))
    rng = np.random.default_rng(rng)
    skip = set(skip)
    n_parts = len(capacities)
    moves = swaps = pairs = 0

    def run_pair(i, j):
        nonlocal labels, moves, swaps, pairs
        if i in skip or j in skip:
            return False
        U = np.vstack([capacities[i], capacities[j]])
        labels, res = improve_labels(g, labels, i, j, U, immovable)
        moves += res.moves
        swaps += res.swaps
        pairs += 1
        return res.changed

    if n_parts >= 2:
        if mode == "strict":
            run_pair(*pick_random_pair(n_parts, rng))
        elif mode == "adjacent":
            for i in range(n_parts - 1):
                run_pair(i, i + 1)
            for _ in range(rounds - 1):
                run_pair(*pick_random_pair(n_parts, rng))
        else:
            # a pair left quiet stays quiet until one of its parts changes
            version = [0] * n_parts
            checked: dict = {}
            for _ in range(max_sweeps):
                a, b = labels[g.rows], labels[g.cols]
                cross = a != b
                touching = {(min(x, y), max(x, y)) for x, y in zip(a[cross].tolist(), b[cross].tolist())}
                changed = False
                for i, j in sorted(touching):
                    if checked.get((i, j)) == (version[i], version[j]):
                        continue
                    if run_pair(i, j):
                        version[i] += 1
                        version[j] += 1
                        changed = True
                    checked[(i, j)] = (version[i], version[j])
                if not changed:
                    break
    return labels, {"mode": mode, "pairs_refined": pairs, "moves": moves, "swaps": swaps}


def _assemble(g: WeightedGraph, root: Node, labels: np.ndarray, run: _Run, elapsed: float) -> PartitionForest:
    leaves = list(root.leaves())
    parts = [np.flatnonzero(labels == k) for k in range(len(leaves))]
    for k, leaf in enumerate(leaves):
        leaf.vertices = parts[k]

    def refresh(node: Node):
        if node.children:
            for c in node.children:
                refresh(c)
            node.vertices = np.sort(np.concatenate([c.vertices for c in node.children]))

    refresh(root)
    capacities = np.array([leaf.capacity[0] for leaf in leaves], dtype=np.int64)
    usage = np.array([g.vertex_weights[p].sum(axis=0) for p in parts], dtype=np.int64)
    for k, leaf in enumerate(leaves):
        leaf.overflow = bool(np.any(usage[k] > capacities[k]))
    run.stats["seconds"] = round(elapsed, 6)
    return PartitionForest(parts, capacities, usage, labels, labels_cut(g, labels), root, run.augmentation_log, run.stats)


def partition_once(g: WeightedGraph, U, fixed: FixedAssignment = NO_FIXED, cfg: PipelineConfig = PipelineConfig(), seed=None) -> PartitionForest:
    t0 = time.perf_counter()
    U = U if isinstance(U, CapacityBound) else CapacityBound(U)
    if U.k == 1:
        U = CapacityBound.uniform(U.limits[0])
    if U.limits.shape != (2, g.m):
        raise InputError(f"capacities must be (2, {g.m}) or (1, {g.m}), got {U.limits.shape}")
    fixed.validate(g.n)
    run = _Run(g, fixed, cfg, cfg.seed if seed is None else seed)
    root = run.bisect(np.arange(g.n), U.limits.copy(), fixed, 0)
    leaves = list(root.leaves())
    for k, leaf in enumerate(leaves):
        leaf.part = k
    labels = np.empty(g.n, dtype=np.int64)
    for k, leaf in enumerate(leaves):
        labels[leaf.vertices] = k
    capacities = np.array([leaf.capacity[0] for leaf in leaves], dtype=np.int64)
    infeasible = {k for k, leaf in enumerate(leaves) if leaf.overflow}
    run.stats["cut_before_refine"] = labels_cut(g, labels)
    labels = run.refine(labels, capacities, infeasible)
    return _assemble(g, root, labels, run, time.perf_counter() - t0)


def partition(g: WeightedGraph, U, fixed: FixedAssignment = NO_FIXED, cfg: PipelineConfig = PipelineConfig()) -> PartitionForest:
    """Best of ``cfg.restarts`` seeded runs (feasible first, then lowest cut)."""
    best = None
    cuts = []
    t0 = time.perf_counter()
    for r in range(cfg.restarts):
        forest = partition_once(g, U, fixed, cfg, seed=cfg.seed + r)
        cuts.append(forest.cut_total)
        key = (not forest.feasible, forest.cut_total)
        if best is None or key < best[0]:
            best = (key, forest, r)
    forest = best[1]
    forest.stats["restart_cuts"] = cuts
    forest.stats["best_restart"] = best[2]
    forest.stats["total_seconds"] = round(time.perf_counter() - t0, 6)
    return forest


def induced_subproblem(g: WeightedGraph, part, U, fixed: FixedAssignment = NO_FIXED, row: int = 0):
    """Subgraph, fixed set and capacities used when bisecting ``part`` again.

    Fixed vertices inside ``part`` are kept on one side together when they all
    come from one group; if both groups are present they keep their sides.
    """
    part = np.asarray(sorted(part), dtype=np.int64)
    if not len(part):
        raise InputError("part must be nonempty")
    sub = g.induced(part)
    position = {int(v): k for k, v in enumerate(part)}
    in1 = frozenset(position[v] for v in fixed.f1 if v in position)
    in2 = frozenset(position[v] for v in fixed.f2 if v in position)
    sub_fixed = FixedAssignment(in1, in2) if in1 and in2 else FixedAssignment(in1 | in2)
    limits = U.limits if isinstance(U, CapacityBound) else np.atleast_2d(np.asarray(U))
    r = limits[min(row, len(limits) - 1)]
    return sub, sub_fixed, CapacityBound(np.vstack([r, r]))
