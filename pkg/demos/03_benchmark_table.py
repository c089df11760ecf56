"""A miniature benchmark: a few generated instances, both variants, three seeds, one table."""
# %%
import tempfile
from pathlib import Path

from ampack.cli import AGGREGATE_COLUMNS, RUN_COLUMNS, aggregate, run_record, write_table
from ampack.instances import GeneratorSpec, generate_instance, write_instance
from ampack.solver import SolverConfig

work = Path(tempfile.mkdtemp())
paths = []
for cls in (1, 2, 3):
    spec = GeneratorSpec(cls, 10, 2, seed=0)
    p = work / f"{spec.name}.json"
    write_instance(generate_instance(spec), p)
    paths.append(p)

# %% one row per (instance, variant, seed)
cfg = SolverConfig(time_limit_s=30)
rows = [run_record(str(p), v, s, cfg) for p in paths for v in ("org", "ts") for s in (0, 1, 2)]
print(write_table(rows, RUN_COLUMNS))

# %% best / average bounds per instance and variant
print(write_table(aggregate(rows), AGGREGATE_COLUMNS))
