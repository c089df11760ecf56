"""Instance files, the random benchmark generator and an adapter for external part tables.

File format (JSON, one document per file)::

    {"format": "ampack-instance", "version": 1, "length_scale": 1,
     "batch_limit": null, "metadata": {...},
     "machines": [{"id", "width", "length", "height",
                   "setup_time", "scan_time", "recoat_time"}, ...],
     "parts": [{"id", "width", "length", "height", "volume"}, ...],
     "known_best": {"makespan": ..., "source": ...}}   # optional

Lengths in the file are in source units.  On read every length is
multiplied by ``length_scale`` and must then be integral; volumes scale by
``length_scale**3``, the per-volume time by ``length_scale**-3`` and the
per-height time by ``length_scale**-1`` so that batch times are unchanged.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import jsonschema
import numpy as np

from .model import Instance, InstanceError, Machine, Part, part_fits_machine

FORMAT_NAME = "ampack-instance"
FORMAT_VERSION = 1

# Generator machine envelopes (width, length, height).
MACHINE_TYPES = {
    1: (40, 40, 25),
    2: (25, 25, 20),
    3: (28, 28, 24),
    4: (28, 28, 32),
    5: (40, 40, 20),
    6: (28, 50, 36),
}

# External-data machine types: width, length, height, recoat h/cm, scan h/cm^3, setup h.
EXTERNAL_MACHINE_TYPES = {
    1: (25.0, 25.0, 32.5, 0.7, 0.030864, 2.0),
    2: (40.0, 80.0, 50.0, 0.25, 0.030864, 1.0),
    3: (40.0, 40.0, 40.0, 0.14, 0.030864, 1.0),
    4: (40.0, 60.0, 45.0, 0.16, 0.030864, 1.0),
}

# (part count, machine count) combinations used for benchmark suites.
INSTANCE_GRID = ((10, 2), (20, 2), (40, 2), (60, 2), (80, 2),
                 (20, 3), (40, 3), (60, 5), (80, 5))

CLASS_SIZE = {1: 50, 2: 50, 3: 50, 4: 500}

# Part-type ranges as fractions of D: (w_lo, w_hi, l_lo, l_hi).
PART_TYPE_RANGES = {
    1: (0.0, 0.2, 0.0, 0.2),
    2: (0.0, 0.2, 0.2, 0.6),
    3: (0.2, 0.4, 0.2, 0.8),
    4: (0.2, 0.6, 0.2, 0.6),
}

DOMINANT_PROBABILITY = 0.7
MAX_RESAMPLES = 1000


class InstanceFormatError(InstanceError):
    """Malformed instance or solution file."""


_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_NONNEG = {"type": "number", "minimum": 0}
_ID = {"type": "integer"}

INSTANCE_SCHEMA = {
    "type": "object",
    "required": ["format", "version", "length_scale", "machines", "parts"],
    "properties": {
        "format": {"const": FORMAT_NAME},
        "version": {"const": FORMAT_VERSION},
        "length_scale": {"type": "integer", "minimum": 1},
        "batch_limit": {"type": ["integer", "null"], "minimum": 1},
        "metadata": {"type": "object"},
        "machines": {
            "type": "array", "minItems": 1,
            "items": {
                "type": "object",
                "required": ["id", "width", "length", "height", "setup_time", "scan_time", "recoat_time"],
                "properties": {"id": _ID, "width": _POS, "length": _POS, "height": _POS,
                               "setup_time": _NONNEG, "scan_time": _NONNEG, "recoat_time": _NONNEG},
            },
        },
        "parts": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "width", "length", "height", "volume"],
                "properties": {"id": _ID, "width": _POS, "length": _POS, "height": _POS, "volume": _NONNEG},
            },
        },
        "known_best": {"type": "object", "properties": {"makespan": _NUM}},
    },
}


def _error_path(err: jsonschema.ValidationError) -> str:
    return "/".join(str(p) for p in err.absolute_path) or "<root>"


def load_document(path, schema: dict, kind: str) -> dict:
    """Parse JSON and validate it, raising InstanceFormatError with location context."""
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    err = jsonschema.exceptions.best_match(jsonschema.Draft7Validator(schema).iter_errors(doc))
    if err is not None:
        raise InstanceFormatError(f"{path}: {kind} field '{_error_path(err)}': {err.message}")
    return doc


def _scaled_int(value: float, scale: int, where: str) -> int:
    v = value * scale
    r = round(v)
    if abs(v - r) > 1e-6:
        raise InstanceFormatError(f"{where}: {value} is not integral at length_scale {scale}")
    return int(r)


def instance_from_dict(doc: dict, where: str = "<instance>") -> Instance:
    s = doc["length_scale"]
    machines = []
    for k, m in enumerate(doc["machines"]):
        loc = f"{where}: machines/{k}"
        machines.append(Machine(
            m["id"], _scaled_int(m["width"], s, loc + "/width"), _scaled_int(m["length"], s, loc + "/length"),
            _scaled_int(m["height"], s, loc + "/height"), float(m["setup_time"]),
            float(m["scan_time"]) / s ** 3, float(m["recoat_time"]) / s))
    parts = []
    for k, p in enumerate(doc["parts"]):
        loc = f"{where}: parts/{k}"
        parts.append(Part(
            p["id"], _scaled_int(p["width"], s, loc + "/width"), _scaled_int(p["length"], s, loc + "/length"),
            _scaled_int(p["height"], s, loc + "/height"), float(p["volume"]) * s ** 3))
    meta = dict(doc.get("metadata", {}))
    if "known_best" in doc:
        meta["known_best"] = doc["known_best"]
    try:
        return Instance(parts, machines, doc.get("batch_limit"), meta, s)
    except InstanceError as exc:
        raise InstanceFormatError(f"{where}: {exc}") from exc


def _unscale(v: int, s: int):
    return v // s if v % s == 0 else v / s


def instance_to_dict(instance: Instance) -> dict:
    s = instance.scale
    meta = dict(instance.metadata)
    known = meta.pop("known_best", None)
    doc = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "length_scale": s,
        "batch_limit": instance.batch_limit,
        "metadata": meta,
        "machines": [
            {"id": m.id, "width": _unscale(m.width, s), "length": _unscale(m.length, s),
             "height": _unscale(m.height, s), "setup_time": m.setup_time,
             "scan_time": m.scan_time * s ** 3, "recoat_time": m.recoat_time * s}
            for m in instance.machines
        ],
        "parts": [
            {"id": p.id, "width": _unscale(p.width, s), "length": _unscale(p.length, s),
             "height": _unscale(p.height, s), "volume": p.volume / s ** 3}
            for p in instance.parts
        ],
    }
    if known is not None:
        doc["known_best"] = known
    return doc


def read_instance(path) -> Instance:
    doc = load_document(path, INSTANCE_SCHEMA, "instance")
    return instance_from_dict(doc, str(path))


def write_instance(instance: Instance, path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(instance), indent=1, sort_keys=True) + "\n")


# ----------------------------------------------------------------------------
# benchmark generator


@dataclass(frozen=True)
class GeneratorSpec:
    part_class: int
    n_parts: int
    n_machines: int
    seed: int = 0
    size: int | None = None         # class constant D; None -> tabulated value
    allow_off_grid: bool = False

    def __post_init__(self):
        if self.part_class not in CLASS_SIZE:
            raise ValueError(f"part class must be one of {sorted(CLASS_SIZE)}, got {self.part_class}")
        if self.n_parts < 1 or self.n_machines < 1:
            raise ValueError("need at least one part and one machine")
        if not self.allow_off_grid and (self.n_parts, self.n_machines) not in INSTANCE_GRID:
            raise ValueError(f"({self.n_parts}, {self.n_machines}) is not a grid combination")

    @property
    def D(self) -> int:
        return self.size if self.size is not None else CLASS_SIZE[self.part_class]

    @property
    def name(self) -> str:
        return f"c{self.part_class}_n{self.n_parts}_m{self.n_machines}_s{self.seed}"


def machine_speeds(sigma: float, phi: float, delta: float, theta: float) -> tuple[float, float]:
    """Per-volume time [h/cm^3] and per-height time [h/cm] from process parameters.

    sigma: scan speed mm/s, phi: s per layer, delta: laser diameter mm,
    theta: layer thickness mm.
    """
    scan = 1000.0 / (sigma * delta * theta) / 3600.0
    recoat = (phi / theta) * 10.0 / 3600.0
    return scan, recoat


def _draw_machine(rng: np.random.Generator, mid: int, mtype: int) -> tuple[Machine, dict]:
    W, L, H = MACHINE_TYPES[mtype]
    sigma = int(rng.integers(8, 12)) * 1000
    phi = int(rng.integers(3, 8))
    delta = int(rng.integers(8, 12)) / 100
    theta = int(rng.integers(4, 11)) / 100
    setup = float(rng.uniform(1.0, 2.0))
    scan, recoat = machine_speeds(sigma, phi, delta, theta)
    info = {"type": mtype, "sigma": sigma, "phi": phi, "delta": delta, "theta": theta}
    return Machine(mid, W, L, H, setup, scan, recoat), info


def _type_probabilities(part_class: int) -> np.ndarray:
    p = np.full(4, (1 - DOMINANT_PROBABILITY) / 3)
    p[part_class - 1] = DOMINANT_PROBABILITY
    return p


def _int_range(lo_frac: float, hi_frac: float, D: int) -> tuple[int, int]:
    lo = max(1, int(round(lo_frac * D)))
    hi = max(lo, int(round(hi_frac * D)))
    return lo, hi


def draw_part_type(rng: np.random.Generator, part_class: int) -> int:
    return int(rng.choice(4, p=_type_probabilities(part_class))) + 1


def draw_part(rng: np.random.Generator, pid: int, ptype: int, D: int) -> Part:
    wl, wh, ll, lh = PART_TYPE_RANGES[ptype]
    w_lo, w_hi = _int_range(wl, wh, D)
    l_lo, l_hi = _int_range(ll, lh, D)
    w = int(rng.integers(w_lo, w_hi + 1))
    length = int(rng.integers(l_lo, l_hi + 1))
    h = int(rng.integers(1, max(1, D // 2) + 1))
    frac = float(rng.uniform(0.3, 1.0))
    return Part(pid, w, length, h, round(frac * w * length * h, 6))


def generate_instance(spec: GeneratorSpec) -> Instance:
    """Random instance for ``spec``; deterministic in ``spec.seed``.

    Machine 0 always has the type-1 envelope.  A part that fits no machine is
    redrawn up to ``MAX_RESAMPLES`` times before giving up.
    """
    rng = np.random.default_rng(spec.seed)
    machines, minfo = [], []
    for k in range(spec.n_machines):
        mtype = 1 if k == 0 else int(rng.integers(1, len(MACHINE_TYPES) + 1))
        m, info = _draw_machine(rng, k, mtype)
        machines.append(m)
        minfo.append(info)
    parts, ptypes = [], []
    for i in range(spec.n_parts):
        for _ in range(MAX_RESAMPLES):
            ptype = draw_part_type(rng, spec.part_class)
            part = draw_part(rng, i, ptype, spec.D)
            if any(part_fits_machine(part, m) for m in machines):
                break
        else:
            raise InstanceError(
                f"part {i}: no machine fits after {MAX_RESAMPLES} draws (class {spec.part_class}, D={spec.D})")
        parts.append(part)
        ptypes.append(ptype)
    meta = {"name": spec.name, "class": spec.part_class, "seed": spec.seed, "D": spec.D,
            "machine_info": minfo, "part_types": ptypes}
    return Instance(parts, machines, metadata=meta)


def suite_specs(classes: Iterable[int] = (1, 2, 3, 4), per_config: int = 5, base_seed: int = 0,
                grid: Sequence[tuple[int, int]] = INSTANCE_GRID) -> list[GeneratorSpec]:
    out = []
    for c in classes:
        for n, m in grid:
            for r in range(per_config):
                out.append(GeneratorSpec(c, n, m, base_seed + r,
                                         allow_off_grid=tuple(grid) != INSTANCE_GRID))
    return out


# ----------------------------------------------------------------------------
# orientation rule and external data


@dataclass(frozen=True)
class OrientationVariant:
    width: float
    length: float
    height: float
    support_volume: float = 0.0


def apply_mhu(variants: Sequence[OrientationVariant]) -> OrientationVariant:
    """Minimum height first, then minimum support volume, then first listed."""
    if not variants:
        raise ValueError("need at least one orientation variant")
    return min(variants, key=lambda v: (v.height, v.support_volume))


PART_COLUMNS = ("part_id", "orientation", "width", "length", "height", "support_volume", "volume")
MACHINE_COLUMNS = ("machine_id", "type")


def _read_csv(path, required: Sequence[str]) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in required if c not in (reader.fieldnames or ())]
        if missing:
            raise InstanceFormatError(f"{path}: missing columns {missing}")
        rows = []
        for row in reader:
            row["_line"] = reader.line_num
            rows.append(row)
    return rows


def _num(row: dict, key: str, path) -> float:
    try:
        return float(row[key])
    except (TypeError, ValueError) as exc:
        raise InstanceFormatError(f"{path}: line {row['_line']}: field '{key}' is not a number") from exc


def read_external(parts_csv, machines_csv, scale: int = 10, machine_types: dict | None = None) -> Instance:
    """Build an instance from delimited part-orientation rows and a machine list.

    Each part row lists one orientation variant; ``volume`` is the base part
    volume (without support).  The orientation is fixed with :func:`apply_mhu`
    and the selected support volume is added.  Machines reference the
    external type table by ``type``.
    """
    machine_types = EXTERNAL_MACHINE_TYPES if machine_types is None else machine_types
    variants: dict[int, list[OrientationVariant]] = {}
    base: dict[int, float] = {}
    for row in _read_csv(parts_csv, PART_COLUMNS):
        pid = int(_num(row, "part_id", parts_csv))
        variants.setdefault(pid, []).append(OrientationVariant(
            _num(row, "width", parts_csv), _num(row, "length", parts_csv),
            _num(row, "height", parts_csv), _num(row, "support_volume", parts_csv)))
        base[pid] = _num(row, "volume", parts_csv)
    doc_parts = []
    for pid in sorted(variants):
        v = apply_mhu(variants[pid])
        doc_parts.append({"id": pid, "width": v.width, "length": v.length, "height": v.height,
                          "volume": base[pid] + v.support_volume})
    doc_machines = []
    for row in _read_csv(machines_csv, MACHINE_COLUMNS):
        t = int(_num(row, "type", machines_csv))
        if t not in machine_types:
            raise InstanceFormatError(f"{machines_csv}: line {row['_line']}: unknown machine type {t}")
        W, L, H, recoat, scan, setup = machine_types[t]
        doc_machines.append({"id": int(_num(row, "machine_id", machines_csv)), "width": W, "length": L,
                             "height": H, "setup_time": setup, "scan_time": scan, "recoat_time": recoat})
    doc = {"format": FORMAT_NAME, "version": FORMAT_VERSION, "length_scale": scale,
           "machines": doc_machines, "parts": doc_parts,
           "metadata": {"source": str(parts_csv)}}
    jsonschema.validate(doc, INSTANCE_SCHEMA)
    return instance_from_dict(doc, str(parts_csv))


# ----------------------------------------------------------------------------
# solutions

SOLUTION_FORMAT = "ampack-solution"

SOLUTION_SCHEMA = {
    "type": "object",
    "required": ["format", "version", "schedule"],
    "properties": {
        "format": {"const": SOLUTION_FORMAT},
        "version": {"const": FORMAT_VERSION},
        "makespan": _NUM,
        "schedule": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["machine_id", "batches"],
                "properties": {
                    "machine_id": _ID,
                    "batches": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["index", "completion", "placements"],
                            "properties": {
                                "index": _ID,
                                "completion": _NUM,
                                "placements": {
                                    "type": "array",
                                    "items": {
                                        "type": "object",
                                        "required": ["part_id", "x", "y", "rotated"],
                                        "properties": {"part_id": _ID, "x": _ID, "y": _ID,
                                                       "rotated": {"type": "boolean"}},
                                    },
                                },
                            },
                        },
                    },
                },
            },
        },
    },
}


def solution_to_dict(solution) -> dict:
    """Coordinates are in the instance's integer (scaled) length units."""
    schedule = []
    for mid in sorted(solution.schedule):
        batches = []
        for b, t in zip(solution.schedule[mid], solution.completion[mid]):
            batches.append({"index": b.index, "completion": t, "placements": [
                {"part_id": pl.part_id, "x": pl.x_start, "y": pl.y_start, "rotated": pl.rotated}
                for pl in b.placements]})
        schedule.append({"machine_id": mid, "batches": batches})
    return {"format": SOLUTION_FORMAT, "version": FORMAT_VERSION, "makespan": solution.makespan,
            "schedule": schedule}


def write_solution(solution, path) -> None:
    Path(path).write_text(json.dumps(solution_to_dict(solution), indent=1, sort_keys=True) + "\n")


def read_solution(path, instance: Instance):
    """Load a solution file against ``instance``; stored completion times are kept as written."""
    from .model import Batch, Solution, place

    doc = load_document(path, SOLUTION_SCHEMA, "solution")
    parts = {p.id: p for p in instance.parts}
    schedule, completion = {}, {}
    for k, entry in enumerate(doc["schedule"]):
        mid = entry["machine_id"]
        batches, times = [], []
        for j, b in enumerate(entry["batches"]):
            members, placements = [], []
            for pl in b["placements"]:
                part = parts.get(pl["part_id"])
                if part is None:
                    raise InstanceFormatError(
                        f"{path}: schedule/{k}/batches/{j}: unknown part id {pl['part_id']}")
                members.append(part)
                placements.append(place(part, pl["x"], pl["y"], pl["rotated"]))
            batches.append(Batch(mid, b["index"], tuple(members), tuple(placements)))
            times.append(float(b["completion"]))
        schedule[mid] = tuple(batches)
        completion[mid] = tuple(times)
    return Solution(schedule, completion)
