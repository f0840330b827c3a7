"""Linear feasibility ``A x = b, x >= 0``.

Exact instances run a dense phase-one simplex over Fractions with Bland's
rule (no cycling, no tolerance).  Float instances go to scipy's HiGHS.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import linprog


def exact_feasible(A: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> list[Fraction] | None:
    """Return a non-negative solution of ``A x = b`` or None if none exists."""
    rows = len(A)
    n = len(A[0]) if rows else 0
    # tableau rows: [A | I_art | b] with b >= 0
    T = []
    for i in range(rows):
        sgn = -1 if b[i] < 0 else 1
        row = [Fraction(sgn * a) for a in A[i]]
        row += [Fraction(int(i == k)) for k in range(rows)]
        row.append(Fraction(sgn * b[i]))
        T.append(row)
    basis = [n + i for i in range(rows)]
    width = n + rows
    # objective: minimise sum of artificials; reduced costs c_j - c_B B^-1 A_j
    cost = [Fraction(0)] * n + [Fraction(1)] * rows
    while True:
        red = list(cost)
        obj = Fraction(0)
        for i, bi in enumerate(basis):
            cb = cost[bi]
            if cb:
                row = T[i]
                for j in range(width):
                    red[j] -= cb * row[j]
                obj += cb * row[-1]
        enter = next((j for j in range(width) if red[j] < 0), None)
        if enter is None:
            break
        leave = None
        best = None
        for i, row in enumerate(T):
            if row[enter] > 0:
                ratio = row[-1] / row[enter]
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:  # unbounded cannot happen in phase one
            break
        piv = T[leave][enter]
        T[leave] = [x / piv for x in T[leave]]
        prow = T[leave]
        for i in range(rows):
            if i != leave and T[i][enter] != 0:
                f = T[i][enter]
                T[i] = [x - f * y for x, y in zip(T[i], prow)]
        basis[leave] = enter
    if obj != 0:
        return None
    x = [Fraction(0)] * n
    for i, bi in enumerate(basis):
        if bi < n:
            x[bi] = T[i][-1]
    return x


def float_feasible(A, b, tol: float = 1e-9) -> np.ndarray | None:
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    n = A.shape[1]
    res = linprog(np.zeros(n), A_eq=A, b_eq=b, bounds=[(0, None)] * n, method="highs")
    if res.status != 0:
        return None
    x = np.maximum(res.x, 0.0)
    if np.max(np.abs(A @ x - b), initial=0.0) > tol * max(1.0, np.abs(b).max(initial=0.0)):
        return None
    return x


def convex_weights(q, generators, exact: bool, tol: float = 1e-9):
    """Weights ``w >= 0, sum w = 1`` with ``sum w_i g_i = q``, or None."""
    d = len(q)
    A = [[g[r] for g in generators] for r in range(d)]
    A.append([1] * len(generators))
    b = list(q) + [1]
    if exact:
        A = [[Fraction(a) for a in row] for row in A]
        return exact_feasible(A, [Fraction(x) for x in b])
    return float_feasible(A, b, tol)
