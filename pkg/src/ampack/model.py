"""Domain types, batch timing and an independent solution validator.

Geometry is integral: every width, length, height and coordinate is an
``int``.  Time coefficients and volumes are floats.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

TIME_TOL = 1e-9


class InstanceError(ValueError):
    """Raised when an instance violates a structural assumption."""


@dataclass(frozen=True)
class Part:
    id: int
    width: int
    length: int
    height: int
    volume: float

    def __post_init__(self):
        for name in ("width", "length", "height"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise InstanceError(f"part {self.id}: {name} must be a positive integer, got {v!r}")
        if self.volume < 0 or self.volume > self.width * self.length * self.height * (1 + 1e-12):
            raise InstanceError(f"part {self.id}: volume {self.volume} outside [0, bounding box]")

    @property
    def area(self) -> int:
        return self.width * self.length

    def orientations(self) -> list[tuple[int, int]]:
        """Distinct (x-extent, y-extent) pairs; one entry for squares."""
        if self.width == self.length:
            return [(self.width, self.length)]
        return [(self.width, self.length), (self.length, self.width)]


@dataclass(frozen=True)
class Machine:
    id: int
    width: int
    length: int
    height: int
    setup_time: float
    scan_time: float
    recoat_time: float

    def __post_init__(self):
        for name in ("width", "length", "height"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise InstanceError(f"machine {self.id}: {name} must be a positive integer, got {v!r}")
        for name in ("setup_time", "scan_time", "recoat_time"):
            if getattr(self, name) < 0:
                raise InstanceError(f"machine {self.id}: {name} must be non-negative")

    @property
    def area(self) -> int:
        return self.width * self.length

    def batch_time(self, volume: float, height: int) -> float:
        """Processing time of one nonempty batch."""
        return self.setup_time + self.scan_time * volume + self.recoat_time * height


@dataclass(frozen=True)
class Placement:
    part_id: int
    x_start: int
    x_end: int
    y_start: int
    y_end: int
    rotated: bool = False

    @property
    def dx(self) -> int:
        return self.x_end - self.x_start

    @property
    def dy(self) -> int:
        return self.y_end - self.y_start

    def overlaps(self, other: "Placement") -> bool:
        return (self.x_start < other.x_end and other.x_start < self.x_end
                and self.y_start < other.y_end and other.y_start < self.y_end)


def place(part: Part, x: int, y: int, rotated: bool = False) -> Placement:
    dx, dy = (part.length, part.width) if rotated else (part.width, part.length)
    return Placement(part.id, x, x + dx, y, y + dy, rotated)


@dataclass(frozen=True)
class Batch:
    machine_id: int
    index: int
    parts: tuple[Part, ...]
    placements: tuple[Placement, ...]

    @property
    def height(self) -> int:
        return max((p.height for p in self.parts), default=0)

    @property
    def volume(self) -> float:
        return sum(p.volume for p in self.parts)

    @property
    def area(self) -> int:
        return sum(p.area for p in self.parts)

    @property
    def part_ids(self) -> frozenset[int]:
        return frozenset(p.id for p in self.parts)


@dataclass(frozen=True)
class Instance:
    parts: tuple[Part, ...]
    machines: tuple[Machine, ...]
    batch_limit: int | None = None
    metadata: Mapping = field(default_factory=dict)
    scale: int = 1

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        object.__setattr__(self, "machines", tuple(self.machines))
        if not self.machines:
            raise InstanceError("instance has no machines")
        if len({p.id for p in self.parts}) != len(self.parts):
            raise InstanceError("duplicate part ids")
        if len({m.id for m in self.machines}) != len(self.machines):
            raise InstanceError("duplicate machine ids")
        for p in self.parts:
            if not any(part_fits_machine(p, m) for m in self.machines):
                raise InstanceError(f"part {p.id} fits no machine")
        if self.batch_limit is not None and self.batch_limit < 1:
            raise InstanceError("batch_limit must be positive")

    def part(self, part_id: int) -> Part:
        return self._part_index[part_id]

    def machine(self, machine_id: int) -> Machine:
        return self._machine_index[machine_id]

    @property
    def _part_index(self) -> dict[int, Part]:
        idx = self.__dict__.get("_pidx")
        if idx is None:
            idx = {p.id: p for p in self.parts}
            object.__setattr__(self, "_pidx", idx)
        return idx

    @property
    def _machine_index(self) -> dict[int, Machine]:
        idx = self.__dict__.get("_midx")
        if idx is None:
            idx = {m.id: m for m in self.machines}
            object.__setattr__(self, "_midx", idx)
        return idx


@dataclass(frozen=True)
class Solution:
    """Per-machine ordered batches with their completion times."""

    schedule: Mapping[int, tuple[Batch, ...]]
    completion: Mapping[int, tuple[float, ...]]

    @property
    def makespan(self) -> float:
        return makespan(self)

    def batches(self) -> Iterable[Batch]:
        for m in sorted(self.schedule):
            yield from self.schedule[m]

    def assignment(self) -> dict[int, tuple[int, int]]:
        """part id -> (machine id, batch index)."""
        return {p.id: (b.machine_id, b.index) for b in self.batches() for p in b.parts}


def part_fits_machine(part: Part, machine: Machine) -> bool:
    if part.height > machine.height:
        return False
    return ((part.width <= machine.width and part.length <= machine.length)
            or (part.length <= machine.width and part.width <= machine.length))


def completion_times(machine: Machine, batches: Sequence[Batch]) -> tuple[float, ...]:
    out = []
    t = 0.0
    for b in batches:
        if not b.parts:
            raise ValueError(f"empty batch {b.index} on machine {machine.id}")
        t += machine.batch_time(b.volume, b.height)
        out.append(t)
    return tuple(out)


def makespan(solution: Solution) -> float:
    return max((t for ts in solution.completion.values() for t in ts), default=0.0)


def build_solution(instance: Instance, groups: Mapping[int, Sequence[tuple[Sequence[int], Sequence[Placement]]]]) -> Solution:
    """Assemble a :class:`Solution` from per-machine lists of (part ids, placements)."""
    schedule = {}
    completion = {}
    for mid, seq in groups.items():
        batches = []
        for k, (ids, placements) in enumerate(seq, start=1):
            batches.append(Batch(mid, k, tuple(instance.part(i) for i in ids), tuple(placements)))
        if not batches:
            continue
        schedule[mid] = tuple(batches)
        completion[mid] = completion_times(instance.machine(mid), batches)
    return Solution(schedule, completion)


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate_geometry(parts: Sequence[Part], placements: Sequence[Placement], machine: Machine) -> list[str]:
    """Containment, orientation and pairwise non-overlap of one batch."""
    errors = []
    by_id = {p.id: p for p in parts}
    if sorted(by_id) != sorted(pl.part_id for pl in placements):
        errors.append(f"machine {machine.id}: placements do not match batch members")
    for pl in placements:
        p = by_id.get(pl.part_id)
        if p is None:
            continue
        want = (p.length, p.width) if pl.rotated else (p.width, p.length)
        if (pl.dx, pl.dy) != want:
            errors.append(f"part {p.id}: extent {pl.dx}x{pl.dy} inconsistent with rotation flag")
        if not (0 <= pl.x_start < pl.x_end <= machine.width and 0 <= pl.y_start < pl.y_end <= machine.length):
            errors.append(f"part {p.id}: placement outside envelope of machine {machine.id}")
        if p.height > machine.height:
            errors.append(f"part {p.id}: height {p.height} exceeds machine {machine.id}")
    for a in range(len(placements)):
        for b in range(a + 1, len(placements)):
            if placements[a].overlaps(placements[b]):
                errors.append(f"parts {placements[a].part_id} and {placements[b].part_id} overlap")
    return errors


def validate_solution(instance: Instance, solution: Solution) -> ValidationReport:
    report = ValidationReport()
    v = report.violations
    seen: dict[int, int] = {}
    for mid, batches in solution.schedule.items():
        try:
            machine = instance.machine(mid)
        except KeyError:
            v.append(f"unknown machine {mid}")
            continue
        for k, b in enumerate(batches, start=1):
            if b.index != k:
                v.append(f"machine {mid}: batch positions not contiguous from 1 (found {b.index} at {k})")
            if b.machine_id != mid:
                v.append(f"machine {mid}: batch {b.index} labelled with machine {b.machine_id}")
            if not b.parts:
                v.append(f"machine {mid}: batch {b.index} is empty")
            for p in b.parts:
                seen[p.id] = seen.get(p.id, 0) + 1
                if instance._part_index.get(p.id) != p:
                    v.append(f"part {p.id} differs from instance data")
            v.extend(validate_geometry(b.parts, b.placements, machine))
        expected = completion_times(machine, [b for b in batches if b.parts]) if all(b.parts for b in batches) else ()
        got = tuple(solution.completion.get(mid, ()))
        if len(got) != len(expected) or any(abs(g - e) > TIME_TOL for g, e in zip(got, expected)):
            v.append(f"machine {mid}: completion times {got} inconsistent with {expected}")
        if any(got[k] > got[k + 1] + TIME_TOL for k in range(len(got) - 1)):
            v.append(f"machine {mid}: completion times decrease")
    for p in instance.parts:
        n = seen.get(p.id, 0)
        if n != 1:
            v.append(f"part {p.id} assigned to {n} batches")
    for pid in seen:
        if pid not in instance._part_index:
            v.append(f"unknown part {pid} in solution")
    for mid in solution.completion:
        if mid not in solution.schedule and solution.completion[mid]:
            v.append(f"machine {mid}: completion times without batches")
    return report
