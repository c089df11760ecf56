"""Exact batching and scheduling of rectangular parts on unrelated 3D printers."""
from .model import (Batch, Instance, InstanceError, Machine, Part, Placement, Solution,
                    ValidationReport, build_solution, completion_times, makespan,
                    part_fits_machine, validate_solution)

__version__ = "0.1.0"
