"""Rotation-aware normal patterns and meet-in-the-middle placement points."""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from ..model import Part

ExtentSelector = Callable[[Part], Sequence[int]]


def both_sides(part: Part) -> tuple[int, ...]:
    return tuple(sorted({part.width, part.length}))


def _reachable(extents: Sequence[Sequence[int]], capacity: int) -> np.ndarray:
    T = np.zeros(capacity + 1, dtype=bool)
    T[0] = True
    for ext in extents:
        old = T.copy()
        for e in ext:
            if 0 < e <= capacity:
                T[e:] |= old[:capacity + 1 - e]
    return T


def adjusted_normal_patterns(parts: Sequence[Part], capacity: int,
                             dimension_selector: ExtentSelector = both_sides) -> list[int]:
    """Sorted positions in [0, capacity] reachable as sums of part extents.

    Each part contributes at most one of its rotation extents (taken from
    ``dimension_selector``); the table for a part is swept against the
    table before that part so both extents are never stacked.
    """
    if capacity < 0:
        return []
    T = _reachable([dimension_selector(p) for p in parts], capacity)
    return [int(p) for p in np.flatnonzero(T)]


def adjusted_minimal_mim_set(parts: Sequence[Part], capacity: int,
                             dimension_selector: ExtentSelector = both_sides) -> list[list[int]]:
    """Per-part start positions combining left-anchored and mirrored points.

    A threshold ``t`` is chosen to minimise the total number of points;
    part ``i`` gets its left normal points below ``t`` and the mirrored
    points ``capacity - extent - p`` at or above ``t``.
    """
    W = capacity
    n = len(parts)
    extents = [tuple(e for e in dimension_selector(p) if e <= W) for p in parts]
    t_left = np.zeros(W + 2, dtype=np.int64)
    t_right = np.zeros(W + 2, dtype=np.int64)
    normal = []
    for i in range(n):
        if not extents[i]:
            normal.append([])
            continue
        others = [extents[j] for j in range(n) if j != i]
        cap = W - min(extents[i])
        V = [int(p) for p in np.flatnonzero(_reachable(others, cap))]
        normal.append(V)
        for p in V:
            t_left[p] += 1
            for e in extents[i]:
                if e < W and W - e - p >= 0:
                    t_right[W - e - p] += 1
    for p in range(1, W + 1):
        t_left[p] += t_left[p - 1]
        t_right[W - p] += t_right[W - p + 1]
    t_min = 1
    best = t_left[0] + t_right[1]
    for p in range(2, W + 1):
        if t_left[p - 1] + t_right[p] < best:
            best = t_left[p - 1] + t_right[p]
            t_min = p

    points = []
    for i in range(n):
        P = set()
        for p in normal[i]:
            if p < t_min:
                P.add(p)
            for e in extents[i]:
                q = W - e - p
                if q >= t_min:
                    P.add(q)
        points.append(sorted(P))
    return points
