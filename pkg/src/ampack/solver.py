"""Branch-and-cut over part-to-batch assignments with lazy packing checks.

The master search assigns parts (largest area first) to (machine, batch)
slots depth first.  Complete assignments are verified batch by batch with
:func:`~ampack.packcheck.check_batch`; every unpackable batch becomes a
no-good cut that forbids the (reduced) part subset in all batches of that
machine for the rest of the search.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field, replace
from typing import Iterable

from .heuristics import start_solution
from .model import Instance, Placement, Solution, build_solution, place
from .packcheck import STAGES, CheckBudgets, check_batch, exact_2dopr
from .packcheck.exact import INFEASIBLE
from .preprocess import infeasible_pair_sets, reduce_batch_count

log = logging.getLogger(__name__)

OPTIMAL = "Optimal"
TIME_LIMIT = "TimeLimit"
PRUNE_TOL = 1e-9
HARD_PACKING_S = 300.0
# residual: exact packing gets the remaining run time; uncapped: no limit at all
CP_BUDGET_POLICIES = ("residual", "uncapped")


@dataclass(frozen=True)
class SolverConfig:
    time_limit_s: float = 3600.0
    ris_budget_s: float = 2.0
    two_step_area_fraction: float = 0.90
    two_step_time_fraction: float = 0.10
    gap_tolerance: float = 7e-6
    seed: int = 0
    area_fraction: float = 1.0
    cp_budget_policy: str = "residual"

    def __post_init__(self):
        for name in ("two_step_area_fraction", "two_step_time_fraction", "area_fraction"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise ValueError(f"{name} must lie in (0, 1], got {v}")
        if self.time_limit_s < 0 or self.ris_budget_s < 0:
            raise ValueError("budgets must be non-negative")
        if self.cp_budget_policy not in CP_BUDGET_POLICIES:
            raise ValueError(f"cp_budget_policy must be one of {CP_BUDGET_POLICIES}")


class CutPool:
    """Per-machine antichain of part subsets proven unpackable."""

    def __init__(self):
        self._cuts: dict[int, list[frozenset[int]]] = {}
        self.log: list[tuple[int, frozenset[int]]] = []

    def __len__(self):
        return sum(len(v) for v in self._cuts.values())

    @property
    def version(self) -> int:
        return len(self.log)

    def cuts(self, machine_id: int) -> list[frozenset[int]]:
        return list(self._cuts.get(machine_id, ()))

    def items(self) -> Iterable[tuple[int, frozenset[int]]]:
        for m in sorted(self._cuts):
            for c in self._cuts[m]:
                yield m, c

    def violated(self, machine_id: int, ids) -> bool:
        return any(c <= ids for c in self._cuts.get(machine_id, ()))

    def add(self, machine_id: int, subset) -> bool:
        subset = frozenset(subset)
        lst = self._cuts.setdefault(machine_id, [])
        if any(c <= subset for c in lst):
            return False
        lst[:] = [c for c in lst if not subset <= c]
        lst.append(subset)
        self.log.append((machine_id, subset))
        return True

    def copy(self) -> "CutPool":
        other = CutPool()
        for m, c in self.items():
            other.add(m, c)
        return other


@dataclass
class SolverStats:
    batches_checked: int = 0
    cuts: dict[str, int] = field(default_factory=lambda: {s: 0 for s in STAGES})
    stage_times: dict[str, float] = field(default_factory=lambda: {s: 0.0 for s in STAGES})
    max_exact_time: float = 0.0
    hard_packings: int = 0
    hard_epsilons: list[float] = field(default_factory=list)
    nodes: int = 0
    leaves: int = 0
    improving_leaves: int = 0
    unverified_leaves: int = 0

    def merge(self, other: "SolverStats") -> "SolverStats":
        out = SolverStats()
        out.batches_checked = self.batches_checked + other.batches_checked
        out.cuts = {s: self.cuts[s] + other.cuts[s] for s in STAGES}
        out.stage_times = {s: self.stage_times[s] + other.stage_times[s] for s in STAGES}
        out.max_exact_time = max(self.max_exact_time, other.max_exact_time)
        out.hard_packings = self.hard_packings + other.hard_packings
        out.hard_epsilons = self.hard_epsilons + other.hard_epsilons
        out.nodes = self.nodes + other.nodes
        out.leaves = self.leaves + other.leaves
        out.improving_leaves = self.improving_leaves + other.improving_leaves
        out.unverified_leaves = self.unverified_leaves + other.unverified_leaves
        return out


@dataclass
class SolveResult:
    incumbent: Solution
    upper: float
    lower: float
    status: str
    stats: SolverStats
    cut_pool: CutPool
    wall_time: float = 0.0

    @property
    def gap(self) -> float:
        if self.upper <= 0:
            return 0.0
        return max(0.0, (self.upper - self.lower) / self.upper)


def epsilon_measure(parts, machine) -> float:
    """Free-area fraction: sum of part areas = (1 - eps) * machine area."""
    return 1.0 - sum(p.area for p in parts) / machine.area


class _Search:
    def __init__(self, instance: Instance, config: SolverConfig, start: Solution, pool: CutPool,
                 deadline: float, t0: float):
        self.inst = instance
        self.cfg = config
        self.pool = pool
        self.deadline = deadline
        self.t0 = t0
        self.stats = SolverStats()
        self.pairs = infeasible_pair_sets(instance)
        self.B = instance.batch_limit or reduce_batch_count(instance)
        self.machines = list(instance.machines)
        self.order = sorted(instance.parts, key=lambda p: (-p.area, p.id))
        self.options = [[k for k, m in enumerate(self.machines) if (p.id, m.id) not in self.pairs.U]
                        for p in self.order]
        self.cap = [m.area * config.area_fraction for m in self.machines]
        min_tl = [min(self.machines[k].scan_time * p.volume for k in self.options[i])
                  for i, p in enumerate(self.order)]
        self.tl_suffix = [0.0] * (len(self.order) + 1)
        for i in range(len(self.order) - 1, -1, -1):
            self.tl_suffix[i] = self.tl_suffix[i + 1] + min_tl[i]
        self.incumbent = start
        self.upper = start.makespan
        self.unverified_min = math.inf
        self.cache: dict[tuple[int, frozenset[int]], tuple[str, list[Placement] | None]] = {}
        self.feasible_sets: dict[int, list[tuple[frozenset[int], list[Placement]]]] = {}
        self.budgets = CheckBudgets(ris=config.ris_budget_s)

    # a batch is (ids frozenset, volume, height, area)
    def _load(self, k: int, batches) -> float:
        m = self.machines[k]
        return sum(m.batch_time(v, h) for _, v, h, _ in batches)

    def _compatible(self, k: int, batch, part) -> bool:
        ids, _, _, area = batch
        if area + part.area > self.cap[k] + 1e-9:
            return False
        mid = self.machines[k].id
        for j in ids:
            if self.pairs.incompatible(part.id, j, mid):
                return False
        return not self.pool.violated(mid, ids | {part.id})

    def bound(self, depth: int, state) -> float:
        loads = [self._load(k, state[k]) for k in range(len(self.machines))]
        lb = max(loads)
        for i in range(depth, len(self.order)):
            p = self.order[i]
            best = math.inf
            for k in self.options[i]:
                m = self.machines[k]
                inc = math.inf
                if len(state[k]) < min(self.B, i + 1):
                    inc = m.setup_time + m.recoat_time * p.height
                for b in state[k]:
                    if b[3] + p.area <= self.cap[k] + 1e-9:
                        inc = min(inc, m.recoat_time * max(0, p.height - b[2]))
                best = min(best, loads[k] + m.scan_time * p.volume + inc)
            lb = max(lb, best)
        return max(lb, (sum(loads) + self.tl_suffix[depth]) / len(self.machines))

    def children(self, depth: int, state):
        p = self.order[depth]
        out = []
        for k in self.options[depth]:
            batches = state[k]
            for b_idx, b in enumerate(batches):
                if self._compatible(k, b, p):
                    nb = (b[0] | {p.id}, b[1] + p.volume, max(b[2], p.height), b[3] + p.area)
                    new_k = batches[:b_idx] + (nb,) + batches[b_idx + 1:]
                    out.append(state[:k] + (new_k,) + state[k + 1:])
            if len(batches) < min(self.B, depth + 1) and p.area <= self.cap[k] + 1e-9:
                nb = (frozenset({p.id}), p.volume, p.height, p.area)
                out.append(state[:k] + (batches + (nb,),) + state[k + 1:])
        return out

    def _violates_new_cuts(self, state, since: int) -> bool:
        for mid, cut in self.pool.log[since:]:
            k = next(i for i, m in enumerate(self.machines) if m.id == mid)
            if any(cut <= b[0] for b in state[k]):
                return True
        return False

    def _lookup(self, mid: int, ids: frozenset[int]):
        hit = self.cache.get((mid, ids))
        if hit is not None:
            return hit
        for sup, placements in self.feasible_sets.get(mid, ()):
            if ids <= sup:
                return "feasible", [pl for pl in placements if pl.part_id in ids]
        if self.pool.violated(mid, ids):
            return INFEASIBLE, None
        return None

    def verify(self, state) -> tuple[str, dict]:
        """Check every multi-part batch; returns ('ok'|'cut'|'timeout', placements)."""
        todo = []
        placements = {}
        for k, batches in enumerate(state):
            m = self.machines[k]
            for b in batches:
                ids = b[0]
                if len(ids) == 1:
                    (pid,) = ids
                    part = self.inst.part(pid)
                    rot = not (part.width <= m.width and part.length <= m.length)
                    placements[(k, ids)] = [place(part, 0, 0, rot)]
                else:
                    todo.append((b[3] / m.area, k, ids))
        todo.sort(key=lambda t: (-t[0], t[1], sorted(t[2])))
        status = "ok"
        for _, k, ids in todo:
            m = self.machines[k]
            hit = self._lookup(m.id, ids)
            if hit is None:
                residual = self.deadline - time.perf_counter()
                if residual <= 0:
                    return "timeout", placements
                parts = [self.inst.part(i) for i in sorted(ids)]
                self.budgets.exact = residual if self.cfg.cp_budget_policy == "residual" else math.inf
                out = check_batch(parts, m, self.budgets)
                self.stats.batches_checked += 1
                for s, t in out.stage_times.items():
                    self.stats.stage_times[s] += t
                self.stats.max_exact_time = max(self.stats.max_exact_time, out.exact_time)
                if out.exact_time > HARD_PACKING_S:
                    self.stats.hard_packings += 1
                    self.stats.hard_epsilons.append(epsilon_measure(parts, m))
                if out.verdict == "feasible":
                    hit = ("feasible", out.placements)
                    self.feasible_sets.setdefault(m.id, []).append((ids, out.placements))
                elif out.verdict == INFEASIBLE:
                    hit = (INFEASIBLE, None)
                    self.stats.cuts[out.stage] += 1
                    self.pool.add(m.id, out.subset)
                else:
                    return "timeout", placements
                self.cache[(m.id, ids)] = hit
            if hit[0] != "feasible":
                if not self.pool.violated(m.id, ids):
                    self.pool.add(m.id, ids)
                status = "cut"
                break
            placements[(k, ids)] = hit[1]
        return status, placements

    def to_solution(self, state, placements) -> Solution:
        groups = {}
        for k, batches in enumerate(state):
            seq = [(sorted(b[0]), placements[(k, b[0])]) for b in batches]
            if seq:
                groups[self.machines[k].id] = seq
        return build_solution(self.inst, groups)

    def run(self):
        root = tuple(() for _ in self.machines)
        root_bound = self.bound(0, root)
        stack = [(root_bound, 0, root, self.pool.version)]
        timed_out = False
        while stack:
            if time.perf_counter() > self.deadline:
                timed_out = True
                break
            bnd, depth, state, version = stack.pop()
            if bnd >= self.upper - PRUNE_TOL:
                continue
            if version < self.pool.version and self._violates_new_cuts(state, version):
                continue
            self.stats.nodes += 1
            if depth == len(self.order):
                self.stats.leaves += 1
                status, placements = self.verify(state)
                if status == "ok":
                    self.incumbent = self.to_solution(state, placements)
                    self.upper = self.incumbent.makespan
                    self.stats.improving_leaves += 1
                    log.debug("incumbent %.6f after %d nodes", bnd, self.stats.nodes)
                elif status == "timeout":
                    self.stats.unverified_leaves += 1
                    self.unverified_min = min(self.unverified_min, bnd)
                    stack.append((bnd, depth, state, self.pool.version))
                    timed_out = True
                    break
                continue
            kids = []
            for child in self.children(depth, state):
                cb = max(bnd, self.bound(depth + 1, child))
                if cb < self.upper - PRUNE_TOL:
                    kids.append((cb, child))
            kids.sort(key=lambda t: t[0])
            v = self.pool.version
            for cb, child in reversed(kids):
                stack.append((cb, depth + 1, child, v))
        open_bounds = [s[0] for s in stack if s[0] < self.upper - PRUNE_TOL] if timed_out else []
        lower = min([self.upper, self.unverified_min] + open_bounds)
        lower = max(lower, min(root_bound, self.upper)) if not timed_out else lower
        return lower, timed_out


def solve(instance: Instance, config: SolverConfig | None = None, start: Solution | None = None,
          cut_pool: CutPool | None = None) -> SolveResult:
    config = config or SolverConfig()
    t0 = time.perf_counter()
    deadline = t0 + config.time_limit_s
    pool = cut_pool if cut_pool is not None else CutPool()
    if start is None:
        start = start_solution(instance, seed=config.seed)
    search = _Search(instance, config, start, pool, deadline, t0)
    lower, timed_out = search.run()
    result = SolveResult(search.incumbent, search.upper, min(lower, search.upper), TIME_LIMIT, search.stats,
                         pool, time.perf_counter() - t0)
    if result.gap <= config.gap_tolerance:
        result.status = OPTIMAL
    return result


def solve_two_step(instance: Instance, config: SolverConfig | None = None) -> SolveResult:
    """Restricted-area warm-up phase followed by the full search."""
    config = config or SolverConfig()
    t0 = time.perf_counter()
    start = start_solution(instance, seed=config.seed)
    pool = CutPool()
    phase1_cfg = replace(config, time_limit_s=config.time_limit_s * config.two_step_time_fraction,
                         area_fraction=config.two_step_area_fraction)
    r1 = solve(instance, phase1_cfg, start=start, cut_pool=pool)
    warm = r1.incumbent if r1.upper < start.makespan else start
    remaining = max(0.0, config.time_limit_s - (time.perf_counter() - t0))
    r2 = solve(instance, replace(config, time_limit_s=remaining), start=warm, cut_pool=pool)
    r2.stats = r1.stats.merge(r2.stats)
    r2.wall_time = time.perf_counter() - t0
    return r2


def audit_cut_pool(instance: Instance, pool: CutPool, time_budget: float = float("inf")) -> list[tuple[int, frozenset[int]]]:
    """Cuts that uncapped exact packing does not confirm as infeasible."""
    bad = []
    for mid, cut in pool.items():
        parts = [instance.part(i) for i in sorted(cut)]
        if exact_2dopr(parts, instance.machine(mid), time_budget).status != INFEASIBLE:
            bad.append((mid, cut))
    return bad
