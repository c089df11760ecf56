"""Start-solution construction: workload balancing plus shelf batching."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import Instance, Machine, Part, Placement, Solution, build_solution, part_fits_machine, place
from .preprocess import infeasible_assignments, pair_placement

STRATEGY_KEYS = ("volume", "height", "area", "max_side", "shuffled")


@dataclass(frozen=True)
class SortingStrategy:
    key: str
    seed: int = 0

    def __post_init__(self):
        if self.key not in STRATEGY_KEYS:
            raise ValueError(f"unknown sorting strategy {self.key!r}")

    def order(self, parts: Sequence[Part]) -> list[Part]:
        if self.key == "shuffled":
            perm = np.random.default_rng(self.seed).permutation(len(parts))
            return [parts[k] for k in perm]
        keyfn = {
            "volume": lambda p: p.volume,
            "height": lambda p: p.height,
            "area": lambda p: p.area,
            "max_side": lambda p: max(p.width, p.length),
        }[self.key]
        return sorted(parts, key=lambda p: (-keyfn(p), p.id))


def default_strategies(seed: int = 0) -> list[SortingStrategy]:
    return [SortingStrategy(k, seed) for k in STRATEGY_KEYS]


def _orient_for_shelf(part: Part, machine: Machine) -> tuple[int, int, bool]:
    """(dx, dy, rotated) with dx >= dy when that orientation fits."""
    wide = part.width >= part.length
    dx, dy = max(part.width, part.length), min(part.width, part.length)
    if dx <= machine.width and dy <= machine.length:
        return dx, dy, not wide
    return dy, dx, wide


def shelf_ffd_pack(parts: Sequence[Part], machine: Machine) -> list[Placement] | None:
    """Shelf first-fit decreasing packing; ``None`` when some part does not fit."""
    items = []
    for p in parts:
        dx, dy, rot = _orient_for_shelf(p, machine)
        if dx > machine.width or dy > machine.length:
            return None
        items.append((p, dx, dy, rot))
    items.sort(key=lambda t: (-t[2], -t[1], t[0].id))

    shelves: list[list[int]] = []  # [y, height, used width]
    top = 0
    out = []
    for p, dx, dy, rot in items:
        for shelf in shelves:
            if machine.width - shelf[2] >= dx and shelf[1] >= dy:
                out.append(place(p, shelf[2], shelf[0], rot))
                shelf[2] += dx
                break
        else:
            if top + dy > machine.length:
                return None
            shelves.append([top, dy, dx])
            out.append(place(p, 0, top, rot))
            top += dy
    return out


def _load(machine: Machine, vol: float, height: int, count: int) -> float:
    return machine.batch_time(vol, height) if count else 0.0


def assign_parts_to_machines(instance: Instance, ordered_parts: Sequence[Part], seed: int = 0,
                             U=None, max_sweeps: int = 1000) -> dict[int, int]:
    if U is None:
        U = infeasible_assignments(instance)
    rng = np.random.default_rng(seed)
    machines = list(instance.machines)
    options = {p.id: [k for k, m in enumerate(machines) if (p.id, m.id) not in U] for p in ordered_parts}
    assign = {p.id: options[p.id][int(rng.integers(len(options[p.id])))] for p in ordered_parts}

    vol = [0.0] * len(machines)
    members: list[list[Part]] = [[] for _ in machines]
    for p in ordered_parts:
        vol[assign[p.id]] += p.volume
        members[assign[p.id]].append(p)

    def load(k, extra=None, without=None):
        hs = [q.height for q in members[k] if q is not without]
        v = vol[k]
        if without is not None:
            v -= without.volume
        if extra is not None:
            hs.append(extra.height)
            v += extra.volume
        return _load(machines[k], v, max(hs, default=0), len(hs))

    loads = [load(k) for k in range(len(machines))]
    for _ in range(max_sweeps):
        improved = False
        for p in ordered_parts:
            src = assign[p.id]
            for dst in options[p.id]:
                if dst == src:
                    continue
                trial = list(loads)
                trial[src] = load(src, without=p)
                trial[dst] = load(dst, extra=p)
                if max(trial) < max(loads) - 1e-12:
                    members[src].remove(p)
                    members[dst].append(p)
                    vol[src] -= p.volume
                    vol[dst] += p.volume
                    assign[p.id] = dst
                    loads = trial
                    improved = True
                    break
        if not improved:
            break
    return {pid: machines[k].id for pid, k in assign.items()}


def _single(part: Part, machine: Machine) -> Placement:
    rotated = not (part.width <= machine.width and part.length <= machine.length)
    return place(part, 0, 0, rotated)


def construct_batches(instance: Instance, assignment: dict[int, int], ordered_parts: Sequence[Part]) -> Solution:
    groups = {}
    for m in instance.machines:
        batches: list[tuple[list[int], list[Placement]]] = []
        members: list[list[Part]] = []
        for p in ordered_parts:
            if assignment[p.id] != m.id:
                continue
            for k, group in enumerate(members):
                if len(group) == 1:
                    pair = pair_placement(group[0], p, m)
                    placements = list(pair) if pair else None
                else:
                    placements = shelf_ffd_pack(group + [p], m)
                if placements is not None:
                    group.append(p)
                    batches[k] = ([q.id for q in group], placements)
                    break
            else:
                members.append([p])
                batches.append(([p.id], [_single(p, m)]))
        if batches:
            groups[m.id] = batches
    return build_solution(instance, groups)


def start_solution(instance: Instance, strategies: Sequence[SortingStrategy] | None = None, seed: int = 0) -> Solution:
    if strategies is None:
        strategies = default_strategies(seed)
    if not strategies:
        raise ValueError("at least one sorting strategy is required")
    U = infeasible_assignments(instance)
    best = None
    for f in strategies:
        ordered = f.order(list(instance.parts))
        assignment = assign_parts_to_machines(instance, ordered, seed, U)
        sol = construct_batches(instance, assignment, ordered)
        if best is None or sol.makespan < best.makespan - 1e-12:
            best = sol
    return best
