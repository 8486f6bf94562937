"""Dense two-phase simplex method with Bland's anti-cycling rule.

Solves min c^T x subject to Ax <= b with free x, by splitting x into a
difference of nonnegative parts and adding slacks. Intended for desk-scale
LMO queries; Bland's rule guarantees termination and speed is irrelevant at
these sizes.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, Infeasible, Unbounded
from .geometry import Polytope

_PIVOT_TOL = 1e-10


def _bland_iterate(T, cost, basis, allowed):
    """Run simplex pivots on tableau T (m x (n+1)) with reduced-cost row
    `cost` (length n+1) until optimal. Bland's rule: entering variable is the
    lowest-index allowed column with negative reduced cost; the leaving row
    breaks ratio ties by the lowest basic variable index."""
    m = T.shape[0]
    while True:
        entering = -1
        for j in range(T.shape[1] - 1):
            if allowed[j] and cost[j] < -_PIVOT_TOL:
                entering = j
                break
        if entering < 0:
            return
        best_ratio = None
        leave = -1
        for i in range(m):
            a = T[i, entering]
            if a > _PIVOT_TOL:
                ratio = T[i, -1] / a
                if (
                    best_ratio is None
                    or ratio < best_ratio - _PIVOT_TOL
                    or (abs(ratio - best_ratio) <= _PIVOT_TOL and basis[i] < basis[leave])
                ):
                    best_ratio = ratio
                    leave = i
        if leave < 0:
            raise Unbounded("no leaving row: LP unbounded below")
        _pivot(T, cost, basis, leave, entering)


def _pivot(T, cost, basis, row, col):
    T[row] /= T[row, col]
    for i in range(T.shape[0]):
        if i != row and abs(T[i, col]) > 0.0:
            T[i] -= T[i, col] * T[row]
    cost -= cost[col] * T[row]
    basis[row] = col


def solve_lp(c, A, b) -> tuple[np.ndarray, float]:
    """Minimize c^T x over {Ax <= b}; returns (x, objective value).

    Raises Infeasible when phase one cannot zero the artificials and
    Unbounded when phase two finds an unbounded ray.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).ravel()
    c = np.asarray(c, dtype=float).ravel()
    m, d = A.shape
    if c.shape != (d,) or b.shape != (m,):
        raise DimensionMismatch("c, A, b shapes disagree")

    # Columns: x+ (d), x- (d), slack (m), artificial (one per negated row).
    neg = b < 0
    n_art = int(neg.sum())
    n = 2 * d + m + n_art
    T = np.zeros((m, n + 1))
    basis = np.zeros(m, dtype=int)
    art_cols = []
    k_art = 0
    for i in range(m):
        sign = -1.0 if neg[i] else 1.0
        T[i, :d] = sign * A[i]
        T[i, d : 2 * d] = -sign * A[i]
        T[i, 2 * d + i] = sign
        T[i, -1] = sign * b[i]
        if neg[i]:
            col = 2 * d + m + k_art
            T[i, col] = 1.0
            basis[i] = col
            art_cols.append(col)
            k_art += 1
        else:
            basis[i] = 2 * d + i

    if n_art:
        cost1 = np.zeros(n + 1)
        cost1[art_cols] = 1.0
        for i in range(m):
            if basis[i] in art_cols:
                cost1 -= T[i]
        allowed = np.ones(n, dtype=bool)
        _bland_iterate(T, cost1, basis, allowed)
        if -cost1[-1] > 1e-7:
            raise Infeasible(f"phase one objective {-cost1[-1]:.3e} > 0")
        # Drive any residual artificial (at value zero) out of the basis.
        keep = np.ones(m, dtype=bool)
        for i in range(m):
            if basis[i] in art_cols:
                piv = next(
                    (j for j in range(2 * d + m) if abs(T[i, j]) > _PIVOT_TOL), None
                )
                if piv is None:
                    keep[i] = False  # redundant row
                else:
                    dummy = np.zeros(n + 1)
                    _pivot(T, dummy, basis, i, piv)
        T = T[keep]
        basis = basis[keep]

    art_set = set(art_cols)
    allowed = np.array([j not in art_set for j in range(n)])
    cost2 = np.zeros(n + 1)
    cost2[:d] = c
    cost2[d : 2 * d] = -c
    for i in range(T.shape[0]):
        if cost2[basis[i]] != 0.0:
            cost2 -= cost2[basis[i]] * T[i]
    _bland_iterate(T, cost2, basis, allowed)

    y = np.zeros(n)
    for i in range(T.shape[0]):
        y[basis[i]] = T[i, -1]
    x = y[:d] - y[d : 2 * d]
    return x, float(c @ x)


def lmo_simplex_method(P: Polytope, g) -> np.ndarray:
    """LMO via the simplex method: minimizes g^T x over the polytope without
    touching the enumerated vertex list. Agrees with the enumeration LMO on
    objective value within 1e-8."""
    x, _ = solve_lp(np.asarray(g, dtype=float), P.A, P.b)
    return x
