"""Hyperplane rounding of relaxed angle vectors into feasible bipartitions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import defaults
from .graph import Bipartition, InputError, WeightedGraph, check_feasibility, cut_size
from .model import ReducedQuadratic, reassemble
from .refine import repair_toward_feasibility


class AugmentationExhausted(RuntimeError):
    def __init__(self, message: str, best: Optional[Bipartition], capacities: np.ndarray):
        super().__init__(message)
        self.best = best
        self.capacities = capacities


@dataclass(frozen=True)
class RoundingConfig:
    planes: int = defaults.PLANES
    keep: int = defaults.KEEP
    seed: Optional[int] = 0
    augmentation_factor: float = defaults.AUGMENTATION_FACTOR
    max_augmentations: int = defaults.MAX_AUGMENTATIONS
    perturb_theta_sigma: float = 0.0

    def __post_init__(self):
        if not 1 <= self.keep <= self.planes:
            raise ValueError("need 1 <= keep <= planes")
        if self.augmentation_factor <= 1:
            raise ValueError("augmentation_factor must exceed 1")
        if self.max_augmentations < 0:
            raise ValueError("max_augmentations must be >= 0")


@dataclass
class RoundingOutcome:
    partitions: list
    objective_values: list
    augmented: list
    overflow: list  # per partition: (side-1 over original row, side-2 over original row)
    capacities: np.ndarray  # capacities the partitions were accepted under
    stage: str  # "top", "scan" or "repair"
    augmentations: int = 0
    candidates: int = 0

    @property
    def best(self) -> Bipartition:
        return self.partitions[0]


def sample_hyperplanes(p: int, seed=None) -> np.ndarray:
    """``2 x p`` matrix of unit normals ``(cos γ, sin γ)`` with γ uniform on [0, 2π)."""
    if p < 1:
        raise InputError("need at least one hyperplane")
    gamma = np.random.default_rng(seed).uniform(0.0, 2.0 * np.pi, size=p)
    return np.vstack([np.cos(gamma), np.sin(gamma)])


def round_against(theta, beta_j) -> tuple[np.ndarray, np.ndarray]:
    """Side-1 gets every vertex with ``(cos θ_i, sin θ_i)·β_j >= 0``."""
    theta = np.asarray(theta, dtype=float)
    proj = np.cos(theta) * beta_j[0] + np.sin(theta) * beta_j[1]
    y1 = (proj >= 0).astype(np.int8)
    return y1, (1 - y1).astype(np.int8)


def _round_all(theta, beta) -> np.ndarray:
    """Columns are the side-1 indicators of every hyperplane, duplicates dropped."""
    S = np.vstack([np.cos(theta), np.sin(theta)])
    Y = (S.T @ beta >= 0).astype(np.int8)
    if Y.shape[0] == 0:
        return Y[:, :1]
    _, first = np.unique(Y.T, axis=0, return_index=True)
    return Y[:, np.sort(first)]


def _values(q: ReducedQuadratic, Y) -> np.ndarray:
    """Reduced objective for every column of a binary matrix."""
    Y1 = np.asarray(Y, dtype=float)
    return q.values(Y1, 1.0 - Y1)


def _scale_floor(g: WeightedGraph, q: ReducedQuadratic, U: np.ndarray) -> float:
    """Smallest uniform capacity scale that passes simple necessary conditions."""
    B = g.vertex_weights.astype(float)
    need = 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        total = B.sum(axis=0)
        ratio = np.where(total > 0, total / (U[0] + U[1]), 0.0)
        need = max(need, float(np.max(ratio, initial=0.0)))
        free_max = B[q.free_vertices].max(axis=0) if q.dim else np.zeros(g.m)
        ratio = np.where(free_max > 0, free_max / np.maximum(U[0], U[1]), 0.0)
        need = max(need, float(np.max(ratio, initial=0.0)))
        for side, fixed in enumerate((q.fixed.f1, q.fixed.f2)):
            if fixed:
                w = B[list(fixed)].sum(axis=0)
                ratio = np.where(w > 0, w / U[side], 0.0)
                need = max(need, float(np.max(ratio, initial=0.0)))
    return need


def round_and_select(
    theta,
    q: ReducedQuadratic,
    g: WeightedGraph,
    U,
    config: RoundingConfig = RoundingConfig(),
) -> RoundingOutcome:
    """Turn a relaxed solution into ranked feasible bipartitions.

    Candidates from ``config.planes`` random hyperplanes are ranked by the
    reduced objective.  The first stage that yields feasible candidates wins:
    the ``keep`` best, then all candidates, then greedy repair of the ``keep``
    best.  If all fail, capacities are scaled up and the cascade restarts.
    """
    theta = np.asarray(theta, dtype=float)
    U0 = np.asarray(U.limits if hasattr(U, "limits") else U, dtype=np.int64)
    if U0.shape != (2, g.m):
        raise InputError(f"capacities must be (2, {g.m}), got {U0.shape}")
    rng = np.random.default_rng(config.seed)
    if config.perturb_theta_sigma > 0:
        theta = theta + rng.normal(0.0, config.perturb_theta_sigma, size=theta.shape)
    beta = sample_hyperplanes(config.planes, rng)

    Y = _round_all(theta, beta)
    values = _values(q, Y)
    order = np.argsort(values, kind="stable")
    Y, values = Y[:, order], values[order]
    full = np.array([reassemble(q, Y[:, k]) for k in range(Y.shape[1])])
    B = g.vertex_weights
    immovable = sorted(q.fixed.f1 | q.fixed.f2)

    def emit(y1_rows, vals, Ucur, stage, augmentations):
        parts, flags, overflow = [], [], []
        for y1 in y1_rows:
            ok, usage = check_feasibility(y1, 1 - y1, B, Ucur)
            parts.append(Bipartition(y1.astype(np.int8), (1 - y1).astype(np.int8), cut_size(g, y1), ok, usage))
            over = tuple(bool(np.any(usage[k] > U0[k])) for k in range(2))
            flags.append(augmentations > 0)
            overflow.append(over)
        return RoundingOutcome(parts, list(map(float, vals)), flags, overflow, Ucur, stage, augmentations, Y.shape[1])

    Ucur = U0.copy()
    scale = 1.0
    for attempt in range(config.max_augmentations + 1):
        usage1 = full @ B
        usage2 = B.sum(axis=0) - usage1
        feasible = np.all(usage1 <= Ucur[0], axis=1) & np.all(usage2 <= Ucur[1], axis=1)
        top = min(config.keep, len(feasible))
        if feasible[:top].any():
            idx = np.flatnonzero(feasible[:top])
            return emit(full[idx], values[idx], Ucur, "top", attempt)
        if feasible.any():
            idx = np.flatnonzero(feasible)[: config.keep]
            return emit(full[idx], values[idx], Ucur, "scan", attempt)
        repaired = {}
        for k in range(top):
            res = repair_toward_feasibility(full[k], g, Ucur, immovable)
            if res.success:
                repaired.setdefault(res.y1.tobytes(), res.y1)
        if repaired:
            rows = np.array(list(repaired.values()))
            vals = _values(q, rows[:, q.free_vertices].T)
            order = np.argsort(vals, kind="stable")
            return emit(rows[order], vals[order], Ucur, "repair", attempt)
        if attempt == config.max_augmentations:
            break
        scale = max(scale * config.augmentation_factor, _scale_floor(g, q, U0))
        if not np.isfinite(scale):
            break
        Ucur = np.ceil(U0 * scale).astype(np.int64)

    best_y1 = full[0] if len(full) else reassemble(q, np.zeros(q.dim, dtype=np.int8))
    ok, usage = check_feasibility(best_y1, 1 - best_y1, B, Ucur)
    best = Bipartition(best_y1, (1 - best_y1).astype(np.int8), cut_size(g, best_y1), ok, usage)
    raise AugmentationExhausted(
        f"no feasible bipartition after {config.max_augmentations} capacity augmentations",
        best,
        Ucur,
    )
