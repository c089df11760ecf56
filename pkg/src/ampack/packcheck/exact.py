"""Exact two-dimensional orthogonal packing with 90 degree rotation.

Backtracking over (rotation, x, y) choices.  The x start positions of each
part come from the meet-in-the-middle point sets and the y start positions
from rotation-aware normal patterns, which keeps the search complete while
shrinking domains.  After every placement the candidate lists of the
remaining parts are filtered (forward checking) and the branch dies as soon
as one of them runs empty.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..model import Machine, Part, Placement, place
from .points import adjusted_minimal_mim_set, adjusted_normal_patterns

FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
TIMEOUT = "timeout"


class _Timeout(Exception):
    pass


@dataclass
class PackResult:
    status: str
    placements: list[Placement] = field(default_factory=list)
    nodes: int = 0

    @property
    def feasible(self) -> bool:
        return self.status == FEASIBLE

    @property
    def infeasible(self) -> bool:
        return self.status == INFEASIBLE


def _orientations(part: Part, machine: Machine) -> list[tuple[int, int, bool]]:
    out = [(part.width, part.length, False)]
    if part.width != part.length:
        out.append((part.length, part.width, True))
    return [o for o in out if o[0] <= machine.width and o[1] <= machine.length]


def placement_domains(parts: Sequence[Part], machine: Machine, full_domains: bool = False):
    """Candidate arrays per part: columns (x0, x1, y0, y1, rotated)."""
    orients = [_orientations(p, machine) for p in parts]
    W, L = machine.width, machine.length
    if full_domains:
        xs = [list(range(W)) for _ in parts]
        ys = [list(range(L)) for _ in parts]
    else:
        def x_ext(p):
            return tuple(o[0] for o in _orientations(p, machine))

        def y_ext(p):
            return tuple(o[1] for o in _orientations(p, machine))

        xs = adjusted_minimal_mim_set(parts, W, x_ext)
        ys = []
        for i, p in enumerate(parts):
            others = [q for j, q in enumerate(parts) if j != i]
            cap = L - min(o[1] for o in orients[i]) if orients[i] else -1
            ys.append(adjusted_normal_patterns(others, cap, y_ext))
    domains = []
    for i in range(len(parts)):
        rows = []
        for dx, dy, rot in orients[i]:
            for y in ys[i]:
                if y + dy > L:
                    continue
                for x in xs[i]:
                    if x + dx <= W:
                        rows.append((x, x + dx, y, y + dy, int(rot)))
        rows.sort(key=lambda r: (r[2], r[0], r[4]))
        domains.append(np.array(rows, dtype=np.int64).reshape(-1, 5))
    return domains


def exact_2dopr(parts: Sequence[Part], machine: Machine, time_budget: float = float("inf"),
                full_domains: bool = False) -> PackResult:
    """Decide whether ``parts`` fit together on the build plate of ``machine``."""
    if time_budget <= 0:
        return PackResult(TIMEOUT)
    deadline = time.perf_counter() + time_budget
    parts = list(parts)
    if not parts:
        return PackResult(FEASIBLE, [])
    if sum(p.area for p in parts) > machine.area:
        return PackResult(INFEASIBLE)

    order = sorted(range(len(parts)), key=lambda k: (-parts[k].area, -max(parts[k].width, parts[k].length), parts[k].id))
    parts = [parts[k] for k in order]
    domains = placement_domains(parts, machine, full_domains)
    if any(len(d) == 0 for d in domains):
        return PackResult(INFEASIBLE)

    n = len(parts)
    # identical parts are interchangeable: force increasing candidate indices
    twin_of = [-1] * n
    for k in range(1, n):
        a, b = parts[k - 1], parts[k]
        if sorted((a.width, a.length)) == sorted((b.width, b.length)):
            twin_of[k] = k - 1

    chosen = [-1] * n
    nodes = 0

    def search(k: int, masks: list[np.ndarray]) -> bool:
        nonlocal nodes
        if k == n:
            return True
        cand = np.flatnonzero(masks[k])
        if twin_of[k] >= 0:
            cand = cand[cand > chosen[twin_of[k]]]
        dom_k = domains[k]
        for c in cand:
            nodes += 1
            if nodes & 255 == 0 and time.perf_counter() > deadline:
                raise _Timeout
            x0, x1, y0, y1, _ = dom_k[c]
            new_masks = masks[:k + 1]
            dead = False
            for j in range(k + 1, n):
                d = domains[j]
                m = masks[j] & ~((d[:, 0] < x1) & (x0 < d[:, 1]) & (d[:, 2] < y1) & (y0 < d[:, 3]))
                if not m.any():
                    dead = True
                    break
                new_masks.append(m)
            if dead:
                continue
            chosen[k] = c
            if search(k + 1, new_masks):
                return True
        chosen[k] = -1
        return False

    try:
        found = search(0, [np.ones(len(d), dtype=bool) for d in domains])
    except _Timeout:
        return PackResult(TIMEOUT, nodes=nodes)
    if not found:
        return PackResult(INFEASIBLE, nodes=nodes)
    placements = []
    for k, p in enumerate(parts):
        x0, x1, y0, y1, rot = domains[k][chosen[k]]
        placements.append(place(p, int(x0), int(y0), bool(rot)))
    return PackResult(FEASIBLE, placements, nodes)
