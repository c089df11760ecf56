"""Bar relaxation: non-contiguous bin packing of unit-width slices.

Every part is sliced along the bin width into unit bars.  A pattern is one
unit-wide column of the bin; it holds at most one bar of each part, either
unrotated (length = part length, counts 1 towards the part's width) or
rotated (length = part width, counts width/length).  The LP optimum of the
covering problem is a lower bound on the bin width needed.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from ..model import Machine, Part
from .lp import solve_lp_with_duals

RC_TOL = 1e-9
BOUND_TOL = 1e-7


@dataclass(frozen=True)
class Pattern:
    """Coefficient per part index (0, 1 or width/length) and the used length."""

    coefficients: tuple[Fraction, ...]
    length: int

    def as_array(self) -> np.ndarray:
        return np.array([float(c) for c in self.coefficients])


def _slices(part: Part, machine: Machine) -> list[tuple[int, Fraction]]:
    """Admissible (bar length, coefficient) choices for one part."""
    out = []
    if part.width <= machine.width and part.length <= machine.length:
        out.append((part.length, Fraction(1)))
    if part.width != part.length and part.length <= machine.width and part.width <= machine.length:
        out.append((part.width, Fraction(part.width, part.length)))
    return out


def pricing_subproblem(duals: Sequence[float], parts: Sequence[Part], capacity: int,
                       machine: Machine | None = None) -> Pattern | None:
    """Most negative reduced-cost pattern, or None if none is below -1e-9.

    Solved as a multiple-choice knapsack by dynamic programming over the
    length capacity (one layer per part, two choices per layer).
    """
    return _price(duals, parts, capacity, machine)[0]


def _price(duals, parts, capacity, machine):
    if machine is None:
        machine = Machine(-1, 10 ** 9, capacity, 10 ** 9, 0.0, 0.0, 0.0)
    n = len(parts)
    NEG = -np.inf
    dp = np.full(capacity + 1, NEG)
    dp[0] = 0.0
    choice = np.full((n, capacity + 1), -1, dtype=np.int64)
    options = [_slices(p, machine) for p in parts]
    for k, p in enumerate(parts):
        new = dp.copy()
        for c_idx, (length, coef) in enumerate(options[k]):
            if length > capacity:
                continue
            profit = float(coef) * duals[k]
            if profit <= 0:
                continue
            cand = np.full(capacity + 1, NEG)
            cand[length:] = dp[:capacity + 1 - length] + profit
            better = cand > new
            new[better] = cand[better]
            choice[k][better] = c_idx
        dp = new
    best_c = int(np.argmax(dp))
    best = float(dp[best_c])
    if not 1.0 - best < -RC_TOL:
        return None, best
    coefs = [Fraction(0)] * n
    c = best_c
    used = 0
    for k in range(n - 1, -1, -1):
        ci = choice[k][c]
        if ci >= 0:
            length, coef = options[k][ci]
            coefs[k] = coef
            c -= length
            used += length
    return Pattern(tuple(coefs), used), best


@dataclass
class BarResult:
    lp_bound: float
    proven_infeasible: bool
    patterns: list[Pattern]
    history: list[float]


def bar_relaxation_bound(parts: Sequence[Part], machine: Machine, max_iter: int | None = None) -> BarResult:
    n = len(parts)
    if n == 0:
        return BarResult(0.0, False, [], [0.0])
    demands = np.array([p.width for p in parts], dtype=float)
    patterns = []
    for k, p in enumerate(parts):
        opts = _slices(p, machine)
        if not opts:
            return BarResult(float("inf"), True, [], [float("inf")])
        length, coef = opts[0]
        coefs = [Fraction(0)] * n
        coefs[k] = coef
        patterns.append(Pattern(tuple(coefs), length))
    if max_iter is None:
        max_iter = 10 * n * machine.length
    history = []
    seen = {pt.coefficients for pt in patterns}
    for _ in range(max_iter):
        S = np.column_stack([pt.as_array() for pt in patterns])
        res = solve_lp_with_duals(S, demands)
        history.append(res.objective)
        new, best = _price(res.duals, parts, machine.length, machine)
        if new is None or new.coefficients in seen:
            break
        seen.add(new.coefficients)
        patterns.append(new)
    # scaling the duals by the best pattern value keeps them feasible for the
    # full master, so this is a valid bound even without convergence
    bound = history[-1] / max(1.0, best)
    return BarResult(bound, bound > machine.width + BOUND_TOL, patterns, history)
