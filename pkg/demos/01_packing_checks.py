"""Walk through the staged feasibility check on a few hand-made batches."""
# %%
import time

from ampack.model import Machine, Part
from ampack.packcheck import (adjusted_minimal_mim_set, adjusted_normal_patterns, bar_relaxation_bound,
                              check_batch, dff_infeasibility_check, exact_2dopr, lb_dmv)

plate = Machine(0, 50, 50, 50, 1.0, 0.03, 0.25)


def parts(*dims):
    return [Part(i, w, l, 5, 0.5 * w * l * 5) for i, (w, l) in enumerate(dims)]


# %% Two 30x30 squares cannot share a 50x50 plate.  The square bound sees it first.
pair = parts((30, 30), (30, 30))
print("square bound:", lb_dmv(pair, plate))
print("bar bound   :", bar_relaxation_bound(pair, plate).lp_bound)
print("pipeline    :", check_batch(pair, plate).stage)

# %% Here the square bound says one plate might do, the scaled-area test disagrees.
tricky = parts((16, 14), (31, 40), (45, 16))
print("area used %.0f%%" % (100 * sum(p.area for p in tricky) / plate.area))
print("square bound:", lb_dmv(tricky, plate), " dff says infeasible:", dff_infeasibility_check(tricky, plate))
print("pipeline    :", check_batch(tricky, plate).stage)

# %% A batch that only the bar relaxation rules out
small = Machine(1, 12, 8, 10, 1.0, 0.03, 0.25)
bars = parts((6, 7), (11, 3))
r = bar_relaxation_bound(bars, small)
print("bar bound %.3f vs plate width %d after %d iterations" % (r.lp_bound, small.width, len(r.history)))

# %% Placement points shrink the search space of the exact packer
mixed = parts((20, 50), (50, 30), (10, 10))
print("y positions:", adjusted_normal_patterns(mixed[1:], 50 - 20))
print("x positions per part:", adjusted_minimal_mim_set(mixed, 50))

# %% Exact packing: a tight fit that needs one rotation
t = time.perf_counter()
res = exact_2dopr(parts((20, 50), (50, 30)), plate)
print(res.status, "in %.3fs" % (time.perf_counter() - t))
for pl in res.placements:
    print("  part %d at x=[%d,%d) y=[%d,%d) rotated=%s" % (pl.part_id, pl.x_start, pl.x_end, pl.y_start,
                                                            pl.y_end, pl.rotated))

# %% When the exact packer proves a batch infeasible, the cut is shrunk first
crowded = parts((30, 30), (30, 30), (5, 5), (4, 4))
out = check_batch(crowded, plate)
print(out.stage, "cut on parts", sorted(out.subset))
