import random
from dataclasses import replace

import pytest
from hypothesis import given, strategies as st

from ampack.heuristics import start_solution
from ampack.model import Instance, Machine, Part, validate_solution
from ampack.solver import (OPTIMAL, CutPool, SolverConfig, audit_cut_pool, epsilon_measure, solve, solve_two_step)
from oracles import optimal_makespan, random_instance

CFG = SolverConfig(time_limit_s=60)


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(two_step_area_fraction=0)
    with pytest.raises(ValueError):
        SolverConfig(time_limit_s=-1)
    with pytest.raises(ValueError):
        SolverConfig(cp_budget_policy="fixed")
    d = SolverConfig()
    assert (d.time_limit_s, d.ris_budget_s, d.two_step_area_fraction, d.two_step_time_fraction,
            d.gap_tolerance) == (3600, 2, 0.9, 0.1, 7e-6)


def test_epsilon_examples():
    m = Machine(0, 50, 50, 5, 1, 0, 0)
    assert epsilon_measure([Part(0, 48, 50, 1, 0)], m) == pytest.approx(0.04)
    assert epsilon_measure([], m) == 1
    assert epsilon_measure([Part(0, 50, 50, 1, 0)], m) == 0


def test_cut_pool_is_an_antichain():
    pool = CutPool()
    assert pool.add(0, {1, 2, 3})
    assert not pool.add(0, {1, 2, 3, 4})
    assert pool.add(0, {1, 2})
    assert pool.cuts(0) == [frozenset({1, 2})]
    assert pool.add(1, {1, 2, 3})
    assert pool.violated(0, frozenset({1, 2, 5})) and not pool.violated(0, frozenset({1, 3}))
    assert len(pool) == 2 and len(pool.copy()) == 2


def test_single_part_single_machine():
    m = Machine(0, 10, 10, 10, 1.5, 0.02, 0.3)
    inst = Instance([Part(0, 3, 4, 5, 40.0)], [m])
    r = solve(inst, CFG)
    assert r.status == OPTIMAL
    assert r.upper == pytest.approx(1.5 + 0.02 * 40 + 0.3 * 5, abs=1e-12)


def test_start_already_optimal_gives_no_improving_leaf():
    m = Machine(0, 50, 50, 50, 1.0, 0.01, 0.1)
    inst = Instance([Part(i, 30, 30, 5, 100.0) for i in range(3)], [m])
    r = solve(inst, CFG)
    assert r.status == OPTIMAL and r.stats.improving_leaves == 0
    assert r.upper == pytest.approx(start_solution(inst).makespan)


@given(st.integers(0, 100_000))
def test_solve_matches_oracle_and_is_valid(seed):
    inst = random_instance(random.Random(seed), max_parts=6)
    r = solve(inst, CFG)
    assert r.status == OPTIMAL
    assert r.upper == pytest.approx(optimal_makespan(inst), abs=1e-9)
    assert r.lower <= r.upper + 1e-9
    assert validate_solution(inst, r.incumbent).ok
    assert sum(r.stats.cuts.values()) <= r.stats.batches_checked
    assert audit_cut_pool(inst, r.cut_pool) == []


@given(st.integers(0, 100_000))
def test_two_step_never_worse_than_start(seed):
    inst = random_instance(random.Random(seed), max_parts=6)
    r = solve_two_step(inst, CFG)
    assert r.upper <= start_solution(inst).makespan + 1e-12
    r1 = solve_two_step(inst, replace(CFG, two_step_area_fraction=1.0))
    assert r1.upper == pytest.approx(solve(inst, CFG).upper, abs=1e-9)


def test_preseeded_cut_pool_gives_same_optimum():
    rng = random.Random(7)
    hits = 0
    for _ in range(40):
        inst = random_instance(rng, max_parts=7)
        first = solve(inst, CFG)
        if not len(first.cut_pool):
            continue
        hits += 1
        again = solve(inst, CFG, cut_pool=first.cut_pool.copy())
        assert again.upper == pytest.approx(first.upper, abs=1e-9)
        assert again.stats.batches_checked <= first.stats.batches_checked
    assert hits > 0


def test_time_limit_zero_reports_bounds():
    inst = random_instance(random.Random(3), max_parts=7, min_parts=6)
    r = solve(inst, replace(CFG, time_limit_s=0))
    assert r.lower <= r.upper + 1e-9
    assert validate_solution(inst, r.incumbent).ok
