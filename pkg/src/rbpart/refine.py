"""One-vertex moves and two-vertex interchanges between a pair of parts.

Used twice: to lower the cut of feasible partitions (:func:`improve`) and to
push an infeasible bipartition under its capacities
(:func:`repair_toward_feasibility`).  Move gains come from per-vertex arrays
of edge weight into each of the two parts, updated in ``O(deg(v))`` per move.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .graph import InputError, WeightedGraph

TOL = 1e-9


@dataclass(frozen=True)
class MovePlan:
    kind: str  # "move" or "swap"
    vertices: tuple
    delta_cut: float
    feasible_after: bool


class _PairState:
    """Mutable working copy of a labelling restricted to parts ``i`` and ``j``."""

    def __init__(self, g: WeightedGraph, labels, i: int, j: int, U, immovable=()):
        self.g = g
        self.adj = g.adjacency
        self.B = g.vertex_weights
        self.labels = np.array(labels, dtype=np.int64)
        self.i, self.j = i, j
        self.U = np.atleast_2d(np.asarray(U, dtype=np.int64))
        if self.U.shape != (2, g.m):
            raise InputError(f"pair capacities must be (2, {g.m}), got {self.U.shape}")
        self.indptr, self.indices, self.data = self.adj.indptr, self.adj.indices, self.adj.data
        member = np.vstack([self.labels == i, self.labels == j]).astype(float)
        w = self.adj @ member.T
        self.w_i, self.w_j = w[:, 0].copy(), w[:, 1].copy()
        self.usage = np.rint(member @ self.B).astype(np.int64)
        self.movable = np.ones(g.n, dtype=bool)
        self.movable[list(immovable)] = False
        self._scratch = np.zeros(g.n)

    def members(self, part: int) -> np.ndarray:
        return np.flatnonzero((self.labels == part) & self.movable)

    def pair_cut(self) -> float:
        in_i = self.labels == self.i
        return float(self.w_j[in_i].sum())

    def feasible(self) -> bool:
        return bool(np.all(self.usage <= self.U))

    def violation(self, usage=None) -> int:
        usage = self.usage if usage is None else usage
        return int(np.maximum(usage - self.U, 0).sum())

    def gain_terms(self):
        """``D_i[s]`` (cut change of moving s from i to j) and ``D_j[t]``."""
        si, sj = self.members(self.i), self.members(self.j)
        return si, self.w_i[si] - self.w_j[si], sj, self.w_j[sj] - self.w_i[sj]

    def weights_from(self, s: int, targets: np.ndarray) -> np.ndarray:
        lo, hi = self.indptr[s], self.indptr[s + 1]
        nbrs = self.indices[lo:hi]
        self._scratch[nbrs] = self.data[lo:hi]
        out = self._scratch[targets].copy()
        self._scratch[nbrs] = 0.0
        return out

    def move(self, v: int) -> None:
        src = self.labels[v]
        dst = self.j if src == self.i else self.i
        lo, hi = self.indptr[v], self.indptr[v + 1]
        nbrs, w = self.indices[lo:hi], self.data[lo:hi]
        if src == self.i:
            self.w_i[nbrs] -= w
            self.w_j[nbrs] += w
            self.usage[0] -= self.B[v]
            self.usage[1] += self.B[v]
        else:
            self.w_j[nbrs] -= w
            self.w_i[nbrs] += w
            self.usage[1] -= self.B[v]
            self.usage[0] += self.B[v]
        self.labels[v] = dst

    # --- candidate search -------------------------------------------------

    def best_move(self):
        """Best feasible cut-decreasing move as ``(delta, v)``, plus a blocked count."""
        best = None
        blocked = 0
        si, Di, sj, Dj = self.gain_terms()
        for verts, deltas, target in ((si, Di, 1), (sj, Dj, 0)):
            if not len(verts):
                continue
            fits = np.all(self.usage[target] + self.B[verts] <= self.U[target], axis=1)
            improving = deltas < -TOL
            blocked += int(np.count_nonzero(improving & ~fits))
            ok = np.flatnonzero(improving & fits)
            if len(ok):
                k = ok[np.argmin(deltas[ok])]
                cand = (float(deltas[k]), int(verts[k]))
                if best is None or cand < best:
                    best = cand
        return best, blocked

    def best_swap(self):
        """Best feasible cut-decreasing swap as ``(delta, s, t)`` with ``s`` in ``i``."""
        si, Di, sj, Dj = self.gain_terms()
        if not len(si) or not len(sj):
            return None, 0
        order = np.argsort(Dj, kind="stable")
        Dj_sorted, tj_sorted = Dj[order], sj[order]
        best_delta = -TOL
        best = None
        blocked = 0
        # 2 w(s, t) >= 0, so D_i[s] + min D_j is a lower bound on any swap through s
        candidates = np.flatnonzero(Di + Dj_sorted[0] < best_delta)
        for k in candidates:
            s, ds = int(si[k]), Di[k]
            limit = np.searchsorted(Dj_sorted, best_delta - ds, side="left")
            if limit == 0:
                continue
            ts = tj_sorted[:limit]
            deltas = ds + Dj_sorted[:limit] + 2.0 * self.weights_from(s, ts)
            delta_B = self.B[ts] - self.B[s]
            fits = np.all(self.usage[0] + delta_B <= self.U[0], axis=1) & np.all(
                self.usage[1] - delta_B <= self.U[1], axis=1
            )
            improving = deltas < best_delta
            blocked += int(np.count_nonzero(improving & ~fits))
            ok = np.flatnonzero(improving & fits)
            if not len(ok):
                continue
            dmin = deltas[ok].min()
            tied = ok[deltas[ok] == dmin]
            best_delta = float(dmin)
            best = (best_delta, s, int(ts[tied].min()))
        return best, blocked


@dataclass
class ImproveResult:
    part_i: np.ndarray
    part_j: np.ndarray
    cut_before: float
    cut_after: float
    moves: int = 0
    swaps: int = 0
    blocked: int = 0
    history: list = field(default_factory=list)

    @property
    def changed(self) -> bool:
        return bool(self.moves or self.swaps)


def pair_cut(g: WeightedGraph, labels, i: int, j: int) -> float:
    """Weight of edges with one end in part ``i`` and the other in ``j``."""
    a, b = labels[g.rows], labels[g.cols]
    crossing = ((a == i) & (b == j)) | ((a == j) & (b == i))
    return float(g.weights[crossing].sum())


def _pair_labels(n, part_i, part_j):
    labels = np.full(n, -1, dtype=np.int64)
    part_i = np.asarray(part_i, dtype=np.int64)
    part_j = np.asarray(part_j, dtype=np.int64)
    labels[part_i] = 0
    if np.any(labels[part_j] == 0):
        raise InputError("parts overlap")
    labels[part_j] = 1
    return labels


def improve(
    part_i,
    part_j,
    g: WeightedGraph,
    U,
    immovable: Iterable[int] = (),
    *,
    debug: bool = False,
) -> ImproveResult:
    """Greedy best-improvement local search on the cut between two parts.

    Alternates a move phase and a swap phase until neither a single feasible
    move nor a single feasible swap lowers the cut.  ``U`` holds the capacity
    rows of ``part_i`` and ``part_j``.  Vertices outside the two parts stay put
    and their edges do not affect move gains.
    """
    labels = _pair_labels(g.n, part_i, part_j)
    state = _PairState(g, labels, 0, 1, U, immovable)
    if not state.feasible():
        raise InputError("input partition violates its capacities; repair it first")
    result = ImproveResult(np.empty(0), np.empty(0), state.pair_cut(), 0.0)
    current = result.cut_before

    def apply(plan: MovePlan, verts):
        nonlocal current
        for v in verts:
            state.move(v)
        current += plan.delta_cut
        result.history.append(plan)
        if debug:
            fresh = pair_cut(g, state.labels, 0, 1)
            assert abs(fresh - current) <= TOL * max(1.0, abs(fresh)), (fresh, current)
            assert state.feasible()

    while True:
        while True:
            found, blocked = state.best_move()
            if found is None:
                result.blocked = blocked
                break
            delta, v = found
            apply(MovePlan("move", (v,), delta, True), (v,))
            result.moves += 1
        swapped = False
        while True:
            found, blocked = state.best_swap()
            if found is None:
                result.blocked += blocked
                break
            delta, s, t = found
            apply(MovePlan("swap", (s, t), delta, True), (s, t))
            result.swaps += 1
            swapped = True
        # the move phase just ended quiet; only a swap can have opened a new move
        if not swapped:
            break

    result.part_i = np.flatnonzero(state.labels == 0)
    result.part_j = np.flatnonzero(state.labels == 1)
    result.cut_after = state.pair_cut()
    return result


def improve_labels(
    g: WeightedGraph,
    labels,
    i: int,
    j: int,
    U,
    immovable: Iterable[int] = (),
    debug: bool = False,
) -> tuple[np.ndarray, ImproveResult]:
    """Run :func:`improve` on parts ``i`` and ``j`` of a multi-way labelling."""
    labels = np.array(labels, dtype=np.int64)
    res = improve(np.flatnonzero(labels == i), np.flatnonzero(labels == j), g, U, immovable, debug=debug)
    labels[res.part_i] = i
    labels[res.part_j] = j
    return labels, res


@dataclass
class RepairResult:
    y1: np.ndarray
    success: bool
    steps: int
    violation: int


def repair_toward_feasibility(y1, g: WeightedGraph, U, immovable: Iterable[int] = ()) -> RepairResult:
    """Greedily reduce total capacity overflow of a bipartition.

    Each step applies the move or swap with the largest overflow reduction,
    preferring lower cut change, then lower vertex ids.  Stops when feasible
    or when nothing reduces the overflow.
    """
    y1 = np.asarray(y1)
    labels = np.where(y1 == 1, 0, 1)
    state = _PairState(g, labels, 0, 1, U, immovable)
    B = state.B
    steps = 0
    while not state.feasible():
        base = state.violation()
        best = None  # (-reduction, cut_delta, kind, verts)
        si, Di, sj, Dj = state.gain_terms()
        verts = np.concatenate([si, sj])
        if len(verts):
            # moving out of part i shifts +B into part j and vice versa
            flow = np.concatenate([B[si], -B[sj]])
            viol = np.maximum(state.usage[0] - flow - state.U[0], 0).sum(axis=1)
            viol += np.maximum(state.usage[1] + flow - state.U[1], 0).sum(axis=1)
            red = base - viol
            if red.max() > 0:
                deltas = np.concatenate([Di, Dj])
                k = np.lexsort((verts, deltas, -red))[0]
                best = (-int(red[k]), float(deltas[k]), 0, (int(verts[k]),))
        if len(si) and len(sj):
            chunk = max(1, 4_000_000 // max(1, len(sj) * g.m))
            for start in range(0, len(si), chunk):
                ss = si[start : start + chunk]
                dB = B[sj][None, :, :] - B[ss][:, None, :]  # weight flowing into part i
                u_i = state.usage[0][None, None, :] + dB
                u_j = state.usage[1][None, None, :] - dB
                viol = np.maximum(u_i - state.U[0], 0).sum(axis=2) + np.maximum(u_j - state.U[1], 0).sum(axis=2)
                red = base - viol
                top = red.max()
                if top <= 0 or (best is not None and -top > best[0]):
                    continue
                for r in np.flatnonzero((red == top).any(axis=1)).tolist():
                    cols = np.flatnonzero(red[r] == top)
                    s = int(ss[r])
                    dcut = Di[start + r] + Dj[cols] + 2.0 * state.weights_from(s, sj[cols])
                    k = int(np.argmin(dcut))  # sj is sorted, so the first minimum has the lowest id
                    cand = (-int(top), float(dcut[k]), 1, (s, int(sj[cols[k]])))
                    if best is None or cand < best:
                        best = cand
        if best is None:
            break
        for v in best[3]:
            state.move(v)
        steps += 1
    y1_out = (state.labels == 0).astype(np.int8)
    return RepairResult(y1_out, state.feasible(), steps, state.violation())


def pick_random_pair(n_parts: int, rng) -> tuple[int, int]:
    """Uniformly random unordered pair of distinct part indices (0-based)."""
    if n_parts < 2:
        raise InputError("need at least two parts to pick a pair")
    rng = np.random.default_rng(rng)
    i, j = rng.choice(n_parts, size=2, replace=False)
    return (int(min(i, j)), int(max(i, j)))
