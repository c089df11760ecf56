"""Staged batch feasibility check and infeasible-subset reduction."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

from ..model import Machine, Part, Placement
from .bar import bar_relaxation_bound
from .dff import dff_infeasibility_check
from .exact import FEASIBLE, INFEASIBLE, TIMEOUT, exact_2dopr
from .lower_bound import lb_dmv

STAGES = ("LB", "DFF", "BAR", "OP")


@dataclass
class CheckBudgets:
    exact: float = float("inf")
    ris: float = 2.0
    dff_combinations: list | None = None
    use_shelf_prepass: bool = True


@dataclass
class CheckOutcome:
    verdict: str
    placements: list[Placement] = field(default_factory=list)
    subset: frozenset[int] = frozenset()
    stage: str | None = None
    stage_times: dict[str, float] = field(default_factory=dict)
    exact_time: float = 0.0

    @property
    def feasible(self) -> bool:
        return self.verdict == FEASIBLE

    @property
    def infeasible(self) -> bool:
        return self.verdict == INFEASIBLE


def reduce_infeasible_subset(parts: Sequence[Part], machine: Machine, per_call_budget: float = 2.0) -> list[Part]:
    """Drop smallest-area parts while the remainder stays provably unpackable."""
    current = sorted(parts, key=lambda p: (p.area, p.id))
    while len(current) > 1:
        trial = current[1:]
        if exact_2dopr(trial, machine, per_call_budget).status != INFEASIBLE:
            break
        current = trial
    return current


def check_batch(parts: Sequence[Part], machine: Machine, budgets: CheckBudgets | None = None) -> CheckOutcome:
    """Run LB -> DFF -> BAR -> exact packing; the first infeasibility wins."""
    if budgets is None:
        budgets = CheckBudgets()
    parts = list(parts)
    ids = frozenset(p.id for p in parts)
    times = {s: 0.0 for s in STAGES}

    t0 = time.perf_counter()
    lb = lb_dmv(parts, machine)
    times["LB"] = time.perf_counter() - t0
    if lb > 1:
        return CheckOutcome(INFEASIBLE, subset=ids, stage="LB", stage_times=times)

    t0 = time.perf_counter()
    dff = dff_infeasibility_check(parts, machine, budgets.dff_combinations)
    times["DFF"] = time.perf_counter() - t0
    if dff:
        return CheckOutcome(INFEASIBLE, subset=ids, stage="DFF", stage_times=times)

    t0 = time.perf_counter()
    bar = bar_relaxation_bound(parts, machine)
    times["BAR"] = time.perf_counter() - t0
    if bar.proven_infeasible:
        return CheckOutcome(INFEASIBLE, subset=ids, stage="BAR", stage_times=times)

    t0 = time.perf_counter()
    if budgets.use_shelf_prepass:
        from ..heuristics import shelf_ffd_pack

        quick = shelf_ffd_pack(parts, machine)
        if quick is not None:
            times["OP"] = time.perf_counter() - t0
            return CheckOutcome(FEASIBLE, quick, stage="OP", stage_times=times, exact_time=times["OP"])
    res = exact_2dopr(parts, machine, budgets.exact)
    exact_time = time.perf_counter() - t0
    if res.status == FEASIBLE:
        times["OP"] = exact_time
        return CheckOutcome(FEASIBLE, res.placements, stage="OP", stage_times=times, exact_time=exact_time)
    if res.status == TIMEOUT:
        times["OP"] = exact_time
        return CheckOutcome(TIMEOUT, stage="OP", stage_times=times, exact_time=exact_time)
    reduced = reduce_infeasible_subset(parts, machine, budgets.ris)
    times["OP"] = time.perf_counter() - t0
    return CheckOutcome(INFEASIBLE, subset=frozenset(p.id for p in reduced), stage="OP",
                        stage_times=times, exact_time=exact_time)
