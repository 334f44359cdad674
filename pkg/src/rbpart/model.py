"""Eliminated and balance-penalized trigonometric relaxation of graph bisection.

For free vertices the relaxed objective over angles ``theta`` is::

    f(theta) = 1/2 (cᵀ Ā c + 2 b̄1ᵀ c + c̄1) + 1/2 (sᵀ Ā s + 2 b̄2ᵀ s + c̄2)

with ``c = cos(theta)``, ``s = sin(theta)`` and ``Ā = A + rho e eᵀ``.  ``Ā`` is
kept as the sparse block ``A`` plus the scalar ``rho``; the rank-one part is
applied as ``rho * sum(x)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .graph import FixedAssignment, InputError

SQUARES = "squares"
DIFFERENCE = "difference"
DENSE_LIMIT = 400  # free-vertex count below which A is also held dense


@dataclass(frozen=True)
class ReducedQuadratic:
    A: sp.csr_matrix
    b1: np.ndarray
    b2: np.ndarray
    c1: float
    c2: float
    rho: float
    free_vertices: np.ndarray
    fixed: FixedAssignment
    n: int
    balance: str = SQUARES

    @property
    def dim(self) -> int:
        return len(self.free_vertices)

    def __post_init__(self):
        # small blocks multiply faster as dense arrays; the rank-one part stays implicit
        dense = self.A.toarray() if self.A.shape[0] <= DENSE_LIMIT else None
        object.__setattr__(self, "_A_dense", dense)

    def apply(self, x: np.ndarray) -> np.ndarray:
        """``Ā x`` for the squares balance term, ``A x`` for the difference one.

        ``x`` may be a vector or a matrix of column vectors.
        """
        out = (self._A_dense if self._A_dense is not None else self.A) @ x
        if self.balance == SQUARES and self.rho:
            out = out + self.rho * x.sum(axis=0)
        return out

    @property
    def _shift(self) -> float:
        # difference variant only: (eᵀy1 - eᵀy2) picks up |F1| - |F2| from the fixed part
        return float(len(self.fixed.f1) - len(self.fixed.f2))

    def value(self, y1, y2) -> float:
        """Objective at arbitrary (not necessarily binary) ``y1, y2`` vectors."""
        y1 = np.asarray(y1, dtype=float)
        y2 = np.asarray(y2, dtype=float)
        f = 0.5 * (y1 @ self.apply(y1) + 2 * self.b1 @ y1 + self.c1)
        f += 0.5 * (y2 @ self.apply(y2) + 2 * self.b2 @ y2 + self.c2)
        if self.balance == DIFFERENCE and self.rho:
            f += 0.5 * self.rho * (y1.sum() - y2.sum() + self._shift) ** 2
        return float(f)

    def values(self, Y1, Y2) -> np.ndarray:
        """Objective for every column pair of ``Y1``, ``Y2``."""
        Y1 = np.asarray(Y1, dtype=float)
        Y2 = np.asarray(Y2, dtype=float)
        f = 0.5 * (np.einsum("ik,ik->k", Y1, self.apply(Y1)) + 2 * self.b1 @ Y1 + self.c1)
        f += 0.5 * (np.einsum("ik,ik->k", Y2, self.apply(Y2)) + 2 * self.b2 @ Y2 + self.c2)
        if self.balance == DIFFERENCE and self.rho:
            f += 0.5 * self.rho * (Y1.sum(axis=0) - Y2.sum(axis=0) + self._shift) ** 2
        return f


def eliminate_and_penalize(
    L: sp.spmatrix,
    fixed: FixedAssignment,
    rho: float,
    balance: str = SQUARES,
) -> ReducedQuadratic:
    """Remove fixed vertices from the Laplacian form and add the balance term.

    ``balance="squares"`` uses ``rho((eᵀy1)² + (eᵀy2)²)``; ``"difference"``
    uses ``rho(eᵀy1 - eᵀy2)²``, which couples ``y1`` and ``y2`` and is therefore
    evaluated as a separate term.
    """
    if rho < 0:
        raise InputError("balance factor rho must be nonnegative")
    if balance not in (SQUARES, DIFFERENCE):
        raise InputError(f"unknown balance term {balance!r}")
    L = sp.csr_matrix(L)
    n = L.shape[0]
    fixed.validate(n)
    free = fixed.free_vertices(n)
    F1 = np.array(sorted(fixed.f1), dtype=np.int64)
    F2 = np.array(sorted(fixed.f2), dtype=np.int64)

    A = L[free][:, free].tocsr()
    b1 = np.asarray(L[free][:, F1].sum(axis=1)).ravel() if len(F1) else np.zeros(len(free))
    b2 = np.asarray(L[free][:, F2].sum(axis=1)).ravel() if len(F2) else np.zeros(len(free))
    c1 = float(L[F1][:, F1].sum()) if len(F1) else 0.0
    c2 = float(L[F2][:, F2].sum()) if len(F2) else 0.0
    if balance == SQUARES:
        b1 = b1 + rho * len(F1)
        b2 = b2 + rho * len(F2)
        c1 += rho * len(F1) ** 2
        c2 += rho * len(F2) ** 2
    b1.setflags(write=False)
    b2.setflags(write=False)
    return ReducedQuadratic(A, b1, b2, c1, c2, float(rho), free, fixed, n, balance)


def _check(q: ReducedQuadratic, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (q.dim,):
        raise InputError(f"angle vector has shape {theta.shape}, expected ({q.dim},)")
    return theta


def objective(q: ReducedQuadratic, theta) -> float:
    theta = _check(q, theta)
    return q.value(np.cos(theta), np.sin(theta))


def gradient(q: ReducedQuadratic, theta) -> np.ndarray:
    return value_and_gradient(q, theta)[1]


def value_and_gradient(q: ReducedQuadratic, theta) -> tuple[float, np.ndarray]:
    theta = _check(q, theta)
    c, s = np.cos(theta), np.sin(theta)
    Ac = q.apply(c) + q.b1
    As = q.apply(s) + q.b2
    f = 0.5 * (c @ Ac + q.b1 @ c + q.c1) + 0.5 * (s @ As + q.b2 @ s + q.c2)
    g = -s * Ac + c * As
    if q.balance == DIFFERENCE and q.rho:
        r = c.sum() - s.sum() + q._shift
        f += 0.5 * q.rho * r * r
        g = g - q.rho * r * (s + c)
    return float(f), g


def reassemble(q: ReducedQuadratic, y1_free) -> np.ndarray:
    """Full-length side-1 indicator with the fixed vertices put back."""
    y1 = np.zeros(q.n, dtype=np.int8)
    y1[q.free_vertices] = np.asarray(y1_free, dtype=np.int8)
    y1[list(q.fixed.f1)] = 1
    return y1


def reduced_value(q: ReducedQuadratic, y1_free) -> float:
    """Reduced objective at a binary assignment of the free vertices."""
    y1 = np.asarray(y1_free, dtype=float)
    return q.value(y1, 1.0 - y1)


def binary_roundtrip(q: ReducedQuadratic, y1_free) -> float:
    """Evaluate the relaxed objective at the angles ``{0, pi/2}`` encoding ``y1_free``."""
    y1 = np.asarray(y1_free)
    if y1.shape != (q.dim,) or not np.all((y1 == 0) | (y1 == 1)):
        raise InputError("expected a binary vector over the free vertices")
    theta = np.where(y1 == 1, 0.0, np.pi / 2)
    return objective(q, theta)


def penalized_objective(L, y1, rho: float, balance: str = SQUARES) -> float:
    """Full-graph ``1/2(y1ᵀLy1 + y2ᵀLy2) + 1/2 rho h(y1, y2)`` with ``y2 = e - y1``."""
    y1 = np.asarray(y1, dtype=float)
    y2 = 1.0 - y1
    val = 0.5 * (y1 @ (L @ y1) + y2 @ (L @ y2))
    if balance == SQUARES:
        val += 0.5 * rho * (y1.sum() ** 2 + y2.sum() ** 2)
    else:
        val += 0.5 * rho * (y1.sum() - y2.sum()) ** 2
    return float(val)
