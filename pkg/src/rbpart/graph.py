"""Graph, hypergraph and constraint containers, plus cut/Laplacian helpers."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp


class InputError(ValueError):
    """Raised when graph or constraint data violates a structural invariant."""


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected graph without self-loops.

    ``rows[k] < cols[k]`` for every stored edge and each unordered pair appears
    once.  ``vertex_weights`` is an ``(n, m)`` integer matrix.
    """

    n: int
    rows: np.ndarray
    cols: np.ndarray
    weights: np.ndarray
    vertex_weights: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int64).reshape(-1)
        cols = np.asarray(self.cols, dtype=np.int64).reshape(-1)
        weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        vw = np.asarray(self.vertex_weights)
        if vw.ndim == 1:
            vw = vw.reshape(-1, 1)
        if not (len(rows) == len(cols) == len(weights)):
            raise InputError("edge arrays differ in length")
        if self.n < 0:
            raise InputError("negative vertex count")
        if len(rows):
            if rows.min() < 0 or cols.max() >= self.n:
                raise InputError("edge endpoint out of range")
            if np.any(rows == cols):
                raise InputError("self-loops are not allowed")
            if np.any(rows > cols):
                raise InputError("edges must be stored with i < j")
            if np.any(weights < 0) or not np.all(np.isfinite(weights)):
                raise InputError("edge weights must be finite and nonnegative")
            keys = rows * self.n + cols
            if len(np.unique(keys)) != len(keys):
                raise InputError("duplicate edge")
        if vw.shape[0] != self.n or vw.shape[1] < 1:
            raise InputError(f"vertex_weights must be ({self.n}, m>=1), got {vw.shape}")
        if not np.issubdtype(vw.dtype, np.integer):
            if not np.all(vw == np.round(vw)):
                raise InputError("vertex weights must be integers")
        vw = vw.astype(np.int64)
        if np.any(vw < 0):
            raise InputError("vertex weights must be nonnegative")
        for name, arr in (("rows", rows), ("cols", cols), ("weights", weights), ("vertex_weights", vw)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: Iterable[tuple[int, int, float]],
        vertex_weights=None,
    ) -> WeightedGraph:
        """Build from ``(i, j, w)`` triples in any orientation (0-based)."""
        triples = [(min(i, j), max(i, j), w) for i, j, w in edges]
        if triples:
            r, c, w = (np.array(x) for x in zip(*triples))
        else:
            r = c = np.zeros(0, dtype=np.int64)
            w = np.zeros(0)
        if vertex_weights is None:
            vertex_weights = np.ones((n, 1), dtype=np.int64)
        return cls(n, r, c, w, vertex_weights)

    @classmethod
    def from_dense(cls, W, vertex_weights=None) -> WeightedGraph:
        W = np.asarray(W, dtype=float)
        if W.shape[0] != W.shape[1] or not np.allclose(W, W.T):
            raise InputError("adjacency matrix must be square and symmetric")
        if np.any(np.diag(W) != 0):
            raise InputError("self-loops are not allowed")
        r, c = np.nonzero(np.triu(W, 1))
        n = W.shape[0]
        if vertex_weights is None:
            vertex_weights = np.ones((n, 1), dtype=np.int64)
        return cls(n, r, c, W[r, c], vertex_weights)

    @property
    def m(self) -> int:
        return self.vertex_weights.shape[1]

    @property
    def num_edges(self) -> int:
        return len(self.rows)

    @property
    def total_edge_weight(self) -> float:
        return float(self.weights.sum())

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        """Symmetric CSR adjacency matrix."""
        n = self.n
        r = np.concatenate([self.rows, self.cols])
        c = np.concatenate([self.cols, self.rows])
        w = np.concatenate([self.weights, self.weights])
        return sp.csr_matrix((w, (r, c)), shape=(n, n))

    def edges(self) -> list[tuple[int, int, float]]:
        return list(zip(self.rows.tolist(), self.cols.tolist(), self.weights.tolist()))

    def induced(self, vertices: Sequence[int]) -> WeightedGraph:
        """Subgraph on ``vertices``; vertex ``vertices[k]`` becomes ``k``."""
        vertices = np.asarray(vertices, dtype=np.int64)
        local = np.full(self.n, -1, dtype=np.int64)
        local[vertices] = np.arange(len(vertices))
        keep = (local[self.rows] >= 0) & (local[self.cols] >= 0)
        a, b = local[self.rows[keep]], local[self.cols[keep]]
        return WeightedGraph(
            len(vertices),
            np.minimum(a, b),
            np.maximum(a, b),
            self.weights[keep],
            self.vertex_weights[vertices],
        )


@dataclass(frozen=True)
class CapacityBound:
    """``(k, m)`` matrix of per-part capacity limits."""

    limits: np.ndarray

    def __post_init__(self):
        U = np.atleast_2d(np.asarray(self.limits))
        if not np.all(U == np.round(U)):
            raise InputError("capacities must be integers")
        U = U.astype(np.int64)
        if np.any(U < 0):
            raise InputError("capacities must be nonnegative")
        U.setflags(write=False)
        object.__setattr__(self, "limits", U)

    @classmethod
    def uniform(cls, capacity, k: int = 2) -> CapacityBound:
        row = np.atleast_1d(np.asarray(capacity))
        return cls(np.tile(row, (k, 1)))

    @property
    def k(self) -> int:
        return self.limits.shape[0]

    @property
    def m(self) -> int:
        return self.limits.shape[1]


@dataclass(frozen=True)
class FixedAssignment:
    """Vertices pinned to side 1 (``f1``) or side 2 (``f2``)."""

    f1: frozenset = field(default_factory=frozenset)
    f2: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "f1", frozenset(int(v) for v in self.f1))
        object.__setattr__(self, "f2", frozenset(int(v) for v in self.f2))
        if self.f1 & self.f2:
            raise InputError(f"vertices fixed to both sides: {sorted(self.f1 & self.f2)}")

    def validate(self, n: int) -> None:
        for v in self.f1 | self.f2:
            if not 0 <= v < n:
                raise InputError(f"fixed vertex {v} out of range [0, {n})")

    def __len__(self) -> int:
        return len(self.f1) + len(self.f2)

    def free_vertices(self, n: int) -> np.ndarray:
        mask = np.ones(n, dtype=bool)
        mask[list(self.f1 | self.f2)] = False
        return np.flatnonzero(mask)


NO_FIXED = FixedAssignment()


@dataclass(frozen=True)
class Hypergraph:
    n: int
    hyperedges: tuple[tuple[tuple[int, ...], float], ...]
    vertex_weights: np.ndarray

    def __post_init__(self):
        edges = []
        for pins, w in self.hyperedges:
            pins = tuple(int(v) for v in pins)
            if len(set(pins)) != len(pins):
                raise InputError(f"hyperedge {pins} repeats a vertex")
            if len(pins) < 2:
                raise InputError(f"hyperedge {pins} has fewer than 2 pins")
            if any(not 0 <= v < self.n for v in pins):
                raise InputError(f"hyperedge {pins} has a pin out of range")
            if w < 0:
                raise InputError("hyperedge weights must be nonnegative")
            edges.append((pins, w))
        object.__setattr__(self, "hyperedges", tuple(edges))
        vw = np.asarray(self.vertex_weights, dtype=np.int64)
        if vw.ndim == 1:
            vw = vw.reshape(-1, 1)
        if vw.shape[0] != self.n:
            raise InputError("vertex_weights row count differs from n")
        object.__setattr__(self, "vertex_weights", vw)


@dataclass(frozen=True)
class Bipartition:
    """Complementary 0/1 indicators of a two-way split over the full vertex set."""

    y1: np.ndarray
    y2: np.ndarray
    cut: float
    feasible: bool
    capacity_usage: np.ndarray

    @classmethod
    def evaluate(cls, g: WeightedGraph, y1, U) -> Bipartition:
        y1 = np.asarray(y1, dtype=np.int8)
        y2 = (1 - y1).astype(np.int8)
        ok, usage = check_feasibility(y1, y2, g.vertex_weights, U)
        return cls(y1, y2, cut_size(g, y1), ok, usage)

    @property
    def side1(self) -> np.ndarray:
        return np.flatnonzero(self.y1)

    @property
    def side2(self) -> np.ndarray:
        return np.flatnonzero(self.y2)


def build_laplacian(g: WeightedGraph) -> sp.csr_matrix:
    """Sparse ``L = diag(W e) - W``."""
    W = g.adjacency
    deg = np.asarray(W.sum(axis=1)).ravel()
    return (sp.diags(deg) - W).tocsr()


def _binary(y, n: int) -> np.ndarray:
    y = np.asarray(y)
    if y.shape != (n,):
        raise InputError(f"indicator has shape {y.shape}, expected ({n},)")
    if not np.all((y == 0) | (y == 1)):
        raise InputError("indicator entries must be 0 or 1")
    return y.astype(bool)


def cut_size(g: WeightedGraph, y1) -> float:
    """Total weight of edges whose endpoints carry different labels."""
    side = _binary(y1, g.n)
    crossing = side[g.rows] != side[g.cols]
    return float(g.weights[crossing].sum())


def labels_cut(g: WeightedGraph, labels) -> float:
    """Cut of a multi-way labelling (one part id per vertex)."""
    labels = np.asarray(labels)
    crossing = labels[g.rows] != labels[g.cols]
    return float(g.weights[crossing].sum())


def check_feasibility(y1, y2, B, U) -> tuple[bool, np.ndarray]:
    """Return ``(feasible, usage)`` where ``usage`` row k is ``y_kᵀ B``."""
    B = np.asarray(B)
    if B.ndim == 1:
        B = B.reshape(-1, 1)
    limits = U.limits if isinstance(U, CapacityBound) else np.atleast_2d(np.asarray(U))
    y1 = np.asarray(y1)
    y2 = np.asarray(y2)
    if y1.shape != (B.shape[0],) or y2.shape != (B.shape[0],):
        raise InputError("indicator length differs from number of vertex-weight rows")
    if limits.shape != (2, B.shape[1]):
        raise InputError(f"capacity matrix must be (2, {B.shape[1]}), got {limits.shape}")
    usage = np.vstack([y1 @ B, y2 @ B])
    return bool(np.all(usage <= limits)), usage


def clique_edges(h: Hypergraph, exact: bool = False):
    """Yield, per hyperedge, the list of ``(i, j, w)`` clique edges it emits.

    With ``exact=True`` the weights are :class:`fractions.Fraction` so totals
    can be compared without rounding.
    """
    for pins, W in h.hyperedges:
        k = len(pins)
        w = Fraction(W) / (k - 1) if exact else W / (k - 1)
        yield [(min(a, b), max(a, b), w) for x, a in enumerate(pins) for b in pins[x + 1 :]]


def expand_hypergraph(h: Hypergraph) -> WeightedGraph:
    """Clique expansion; edges produced by several hyperedges are summed."""
    acc: dict[tuple[int, int], float] = {}
    for emitted in clique_edges(h):
        for i, j, w in emitted:
            acc[(i, j)] = acc.get((i, j), 0.0) + w
    return WeightedGraph.from_edges(h.n, ((i, j, w) for (i, j), w in acc.items()), h.vertex_weights)
