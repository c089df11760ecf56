"""Generate a small benchmark instance, then compare the start heuristic with both solver variants."""
# %%
from ampack.heuristics import start_solution
from ampack.instances import GeneratorSpec, generate_instance
from ampack.model import validate_solution
from ampack.solver import SolverConfig, solve, solve_two_step

inst = generate_instance(GeneratorSpec(part_class=3, n_parts=10, n_machines=2, seed=4))
for m in inst.machines:
    print("machine %d: %dx%dx%d  setup %.2fh  scan %.5fh/cm3  recoat %.3fh/cm" % (
        m.id, m.width, m.length, m.height, m.setup_time, m.scan_time, m.recoat_time))
print(len(inst.parts), "parts, total area", sum(p.area for p in inst.parts))

# %% start solution
start = start_solution(inst)
print("start makespan %.3f" % start.makespan)

# %% branch and cut, plain and two-step
cfg = SolverConfig(time_limit_s=60)
for name, fn in (("org", solve), ("ts", solve_two_step)):
    r = fn(inst, cfg)
    print("%-3s U=%.4f L=%.4f gap=%.2f%% status=%s checked=%d cuts=%s  %.1fs" % (
        name, r.upper, r.lower, 100 * r.gap, r.status, r.stats.batches_checked, r.stats.cuts, r.wall_time))

# %% the schedule itself
assert validate_solution(inst, r.incumbent).ok
for mid, batches in r.incumbent.schedule.items():
    for b, c in zip(batches, r.incumbent.completion[mid]):
        print("machine %d batch %d: parts %s  height %d  done at %.3f" % (
            mid, b.index, sorted(b.part_ids), b.height, c))
