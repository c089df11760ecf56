"""Dual feasible functions and the rotation-aware scaled-area relaxation."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Sequence

import numpy as np

from ..model import Machine, Part

FEAS_TOL = 1e-12


@dataclass(frozen=True)
class DualFeasibleFunction:
    """A map [0, 1] -> [0, 1] that preserves ``sum <= 1``.

    ``family`` is one of ``"identity"``, ``"threshold"`` (parameter eps) or
    ``"staircase"`` (parameter k).
    """

    family: str
    param: Fraction | int | None = None

    def __call__(self, x) -> Fraction:
        return _evaluate(self.family, self.param, Fraction(x))

    def __str__(self):
        return self.family if self.param is None else f"{self.family}({self.param})"


@lru_cache(maxsize=None)
def _evaluate(family: str, param, x: Fraction) -> Fraction:
    if family == "identity":
        return x
    if family == "threshold":
        eps = param
        if x > 1 - eps:
            return Fraction(1)
        if x < eps:
            return Fraction(0)
        return x
    if family == "staircase":
        k = param
        scaled = (k + 1) * x
        if scaled.denominator == 1:
            return x
        return Fraction(math.floor(scaled), k)
    raise ValueError(f"unknown DFF family {family!r}")


def registered_functions() -> list[DualFeasibleFunction]:
    fns = [DualFeasibleFunction("identity")]
    fns += [DualFeasibleFunction("threshold", Fraction(1, d)) for d in range(10, 1, -1)]
    fns += [DualFeasibleFunction("staircase", k) for k in range(1, 10)]
    return fns


def default_combinations() -> list[tuple[DualFeasibleFunction, DualFeasibleFunction]]:
    fns = registered_functions()
    return list(product(fns, fns))


_DEFAULT = None


def _default_combinations_cached():
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = default_combinations()
    return _DEFAULT


def scaled_area_table(parts: Sequence[Part], machine: Machine, combinations) -> list[np.ndarray]:
    """Per part, an array (orientations x combinations) of transformed areas.

    Orientations that do not fit the bin are dropped.
    """
    W, L = machine.width, machine.length
    out = []
    for p in parts:
        rows = []
        for dx, dy in p.orientations():
            if dx > W or dy > L:
                continue
            fx, fy = Fraction(dx, W), Fraction(dy, L)
            rows.append([float(u1(fx) * u2(fy)) for u1, u2 in combinations])
        out.append(np.array(rows, dtype=float))
    return out


def dff_infeasibility_check(parts: Sequence[Part], machine: Machine, dff_combinations=None) -> bool:
    """True iff no rotation choice keeps every transformed area sum <= 1."""
    if not parts:
        return False
    combos = dff_combinations if dff_combinations is not None else _default_combinations_cached()
    if not combos:
        raise ValueError("dff_combinations must be nonempty")
    table = scaled_area_table(parts, machine, combos)
    if any(t.shape[0] == 0 for t in table):
        return True
    # most constrained (largest minimal contribution) first
    order = sorted(range(len(table)), key=lambda k: -table[k].min(axis=0).sum())
    table = [table[k] for k in order]
    mins = [t.min(axis=0) for t in table]
    suffix = [np.zeros(len(combos))]
    for m in reversed(mins):
        suffix.append(suffix[-1] + m)
    suffix.reverse()

    limit = 1.0 + FEAS_TOL

    def dfs(k: int, acc: np.ndarray) -> bool:
        if np.any(acc + suffix[k] > limit):
            return False
        if k == len(table):
            return True
        for row in table[k]:
            if dfs(k + 1, acc + row):
                return True
        return False

    return not dfs(0, np.zeros(len(combos)))
