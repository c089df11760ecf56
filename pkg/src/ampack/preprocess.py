"""Static infeasibility structures and the batch budget."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .model import Instance, Machine, Part, Placement, part_fits_machine, place


@dataclass(frozen=True)
class InfeasiblePairSets:
    U: frozenset[tuple[int, int]]
    Q: dict[int, frozenset[tuple[int, int]]]

    def forbidden(self, part_id: int, machine_id: int) -> bool:
        return (part_id, machine_id) in self.U

    def incompatible(self, i: int, j: int, machine_id: int) -> bool:
        return (min(i, j), max(i, j)) in self.Q.get(machine_id, frozenset())


def infeasible_assignments(instance: Instance) -> frozenset[tuple[int, int]]:
    return frozenset((p.id, m.id) for p in instance.parts for m in instance.machines
                     if not part_fits_machine(p, m))


def pair_placement(a: Part, b: Part, machine: Machine) -> tuple[Placement, Placement] | None:
    """Closed-form joint placement of two rectangles, or None if impossible."""
    W, L = machine.width, machine.length
    for ra in (False, True):
        wa, la = (a.length, a.width) if ra else (a.width, a.length)
        for rb in (False, True):
            wb, lb = (b.length, b.width) if rb else (b.width, b.length)
            if wa + wb <= W and max(la, lb) <= L:
                return place(a, 0, 0, ra), place(b, wa, 0, rb)
            if la + lb <= L and max(wa, wb) <= W:
                return place(a, 0, 0, ra), place(b, 0, la, rb)
    return None


def pair_fits(a: Part, b: Part, machine: Machine) -> bool:
    return pair_placement(a, b, machine) is not None


def pairwise_incompatibilities(instance: Instance, U: frozenset | None = None) -> dict[int, frozenset[tuple[int, int]]]:
    if U is None:
        U = infeasible_assignments(instance)
    Q = {}
    for m in instance.machines:
        fitting = [p for p in instance.parts if (p.id, m.id) not in U]
        Q[m.id] = frozenset((min(a.id, b.id), max(a.id, b.id))
                            for a, b in combinations(fitting, 2) if not pair_fits(a, b, m))
    return Q


def infeasible_pair_sets(instance: Instance) -> InfeasiblePairSets:
    U = infeasible_assignments(instance)
    return InfeasiblePairSets(U, pairwise_incompatibilities(instance, U))


def normalized(part: Part) -> Part:
    """Copy with width >= length."""
    if part.width >= part.length:
        return part
    return Part(part.id, part.length, part.width, part.height, part.volume)


def machine_batch_count(parts: list[Part], machine: Machine) -> int:
    """First-fit batches needed on one machine using the shelf packer."""
    from .heuristics import shelf_ffd_pack

    fitting = [normalized(p) for p in parts if part_fits_machine(p, machine)]
    fitting.sort(key=lambda p: (-p.width, -p.length, p.id))
    batches: list[list[Part]] = []
    for p in fitting:
        for members in batches:
            if shelf_ffd_pack(members + [p], machine) is not None:
                members.append(p)
                break
        else:
            batches.append([p])
    return len(batches)


def reduce_batch_count(instance: Instance) -> int:
    counts = [machine_batch_count(list(instance.parts), m) for m in instance.machines]
    return max(max(counts), 1)
