"""Small dense LP for the column-generation master.

The covering master ``min 1'z  s.t.  S z >= d, z >= 0`` is solved through its
dual ``max d'y  s.t.  S'y <= 1, y >= 0``: the slack basis is feasible, so a
single-phase tableau simplex with Bland's rule suffices.  Primal values are
read off the reduced costs of the slacks.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-12


class LPError(RuntimeError):
    pass


@dataclass
class LPResult:
    objective: float
    primal: np.ndarray
    duals: np.ndarray
    iterations: int


def solve_lp_with_duals(columns, demands, max_iter: int = 100_000) -> LPResult:
    """Solve the covering LP; ``columns`` is (rows x patterns)."""
    S = np.atleast_2d(np.asarray(columns, dtype=float))
    d = np.asarray(demands, dtype=float)
    m, n = S.shape
    if d.shape != (m,):
        raise ValueError("demands length must equal the number of rows")
    if np.any(d < 0):
        raise ValueError("demands must be non-negative")
    if m == 0:
        return LPResult(0.0, np.zeros(n), np.zeros(0), 0)

    # dual tableau: n constraints, m structural vars + n slacks
    T = np.zeros((n + 1, m + n + 1))
    T[:n, :m] = S.T
    T[:n, m:m + n] = np.eye(n)
    T[:n, -1] = 1.0
    T[n, :m] = -d
    basis = list(range(m, m + n))

    it = 0
    while True:
        entering = next((j for j in range(m + n) if T[n, j] < -1e-11), None)
        if entering is None:
            break
        it += 1
        if it > max_iter:
            raise LPError("simplex iteration limit reached")
        col = T[:n, entering]
        best = None
        for i in range(n):
            if col[i] > PIVOT_TOL:
                ratio = T[i, -1] / col[i]
                if best is None or ratio < best[0] - 1e-12 or (abs(ratio - best[0]) <= 1e-12 and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            # dual unbounded: some demand row cannot be covered
            raise LPError("restricted master is infeasible")
        r = best[1]
        T[r] /= T[r, entering]
        for i in range(n + 1):
            if i != r and T[i, entering] != 0.0:
                T[i] -= T[i, entering] * T[r]
        basis[r] = entering

    y = np.zeros(m)
    for i, b in enumerate(basis):
        if b < m:
            y[b] = T[i, -1]
    z = np.maximum(T[n, m:m + n].copy(), 0.0)
    return LPResult(float(T[n, -1]), z, y, it)
