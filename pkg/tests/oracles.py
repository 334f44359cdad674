"""Independent reference computations for the tests.

Everything here works from plain edge lists with Python loops or
``itertools`` and shares no code with the package under test.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np


def random_edges(rng, n, p, wmax=100):
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                edges.append((i, j, float(rng.integers(1, wmax + 1))))
    return edges


def cut_of(edges, side1):
    s = set(side1)
    return sum(w for i, j, w in edges if (i in s) != (j in s))


def labels_cut_of(edges, labels):
    return sum(w for i, j, w in edges if labels[i] != labels[j])


def dense_laplacian(n, edges):
    L = [[0.0] * n for _ in range(n)]
    for i, j, w in edges:
        L[i][i] += w
        L[j][j] += w
        L[i][j] -= w
        L[j][i] -= w
    return np.array(L)


def full_penalized(n, edges, side1, rho, balance="squares"):
    """cut + 1/2 rho h(y1, y2) on the full assignment."""
    k1 = len(set(side1))
    k2 = n - k1
    h = k1 * k1 + k2 * k2 if balance == "squares" else (k1 - k2) ** 2
    return cut_of(edges, side1) + 0.5 * rho * h


def usage_of(B, members):
    B = np.asarray(B)
    return np.array([sum(int(B[v, r]) for v in members) for r in range(B.shape[1])], dtype=np.int64)


def best_bipartition(n, edges, B, U, f1=(), f2=()):
    """Minimum cut over all side-1 sets respecting fixed vertices and both capacity rows."""
    U = np.atleast_2d(np.asarray(U))
    if len(U) == 1:
        U = np.vstack([U, U])
    f1, f2 = set(f1), set(f2)
    free = [v for v in range(n) if v not in f1 and v not in f2]
    best = None
    for bits in itertools.product((0, 1), repeat=len(free)):
        side1 = f1 | {v for v, b in zip(free, bits) if b}
        side2 = set(range(n)) - side1
        if np.any(usage_of(B, side1) > U[0]) or np.any(usage_of(B, side2) > U[1]):
            continue
        c = cut_of(edges, side1)
        if best is None or c < best:
            best = c
    return best


def feasible_kway_exists(n, B, row, k):
    """Whether some labelling into at most ``k`` parts keeps every part within ``row``."""
    B = np.asarray(B)
    for labels in itertools.product(range(k), repeat=n):
        ok = True
        for p in range(k):
            members = [v for v in range(n) if labels[v] == p]
            if np.any(usage_of(B, members) > row):
                ok = False
                break
        if ok:
            return True
    return False


def improving_moves(edges, B, labels, i, j, caps, immovable=(), tol=1e-9):
    """Every feasible single move or swap between parts i and j that lowers the total cut.

    ``caps`` maps part id to its capacity row.
    """
    B = np.asarray(B)
    base = labels_cut_of(edges, labels)
    members = {p: [v for v in range(len(labels)) if labels[v] == p] for p in (i, j)}
    fixed = set(immovable)

    def fits(lab):
        for p in (i, j):
            if np.any(usage_of(B, [v for v in range(len(lab)) if lab[v] == p]) > caps[p]):
                return False
        return True

    found = []
    for v in members[i] + members[j]:
        if v in fixed:
            continue
        lab = list(labels)
        lab[v] = j if labels[v] == i else i
        if fits(lab) and labels_cut_of(edges, lab) < base - tol:
            found.append(("move", v))
    for s in members[i]:
        for t in members[j]:
            if s in fixed or t in fixed:
                continue
            lab = list(labels)
            lab[s], lab[t] = j, i
            if fits(lab) and labels_cut_of(edges, lab) < base - tol:
                found.append(("swap", s, t))
    return found


def clique_totals_exact(hyperedges):
    """Per hyperedge: W * |E| / 2 as a Fraction."""
    return [Fraction(w) * len(pins) / 2 for pins, w in hyperedges]


def finite_difference(f, x, h=1e-6):
    g = np.zeros_like(x)
    for k in range(len(x)):
        e = np.zeros_like(x)
        e[k] = h
        g[k] = (f(x + e) - f(x - e)) / (2 * h)
    return g
