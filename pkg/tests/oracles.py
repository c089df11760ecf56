"""Brute-force reference implementations used only by the tests.

Nothing here imports the search machinery under test; the packing oracle
enumerates grid cells directly and the scheduling oracle enumerates subsets.
"""
from __future__ import annotations

from functools import lru_cache
from itertools import product

import numpy as np


def grid_pack(dims, W, L):
    """Exhaustive grid search: can rectangles ``dims`` (rotatable) fill-free fit W x L?

    Cells are decided in row-major order.  The first undecided cell is either
    left empty or becomes the lower-left corner of some unplaced rectangle;
    this enumerates every packing up to the order of identical pieces.
    """
    dims = [tuple(d) for d in dims]
    if sum(w * l for w, l in dims) > W * L:
        return False
    if not dims:
        return True
    grid = np.zeros((L, W), dtype=bool)
    free_total = W * L - sum(w * l for w, l in dims)
    n = len(dims)
    used = [False] * n

    def rec(cell, waste, left):
        if left == 0:
            return True
        while cell < W * L and grid[cell // W, cell % W]:
            cell += 1
        if cell >= W * L:
            return False
        y, x = divmod(cell, W)
        tried = set()
        for k in range(n):
            if used[k]:
                continue
            for w, l in {dims[k], dims[k][::-1]}:
                if (w, l) in tried:
                    continue
                if x + w > W or y + l > L:
                    continue
                if grid[y:y + l, x:x + w].any():
                    continue
                tried.add((w, l))
                grid[y:y + l, x:x + w] = True
                used[k] = True
                if rec(cell + 1, waste, left - 1):
                    return True
                used[k] = False
                grid[y:y + l, x:x + w] = False
        if waste < free_total:
            grid[y, x] = True
            ok = rec(cell + 1, waste + 1, left)
            grid[y, x] = False
            if ok:
                return True
        return False

    return rec(0, 0, n)


def fits(part, machine):
    if part.height > machine.height:
        return False
    return ((part.width <= machine.width and part.length <= machine.length)
            or (part.length <= machine.width and part.width <= machine.length))


def optimal_makespan(instance, max_batches=None):
    """Exact optimum by subset dynamic programming per machine.

    ``max_batches`` caps the number of batches per machine (None = no cap).
    """
    cap = max_batches if max_batches is not None else len(instance.parts) + 1
    parts = list(instance.parts)
    n = len(parts)
    machines = list(instance.machines)

    def machine_table(m):
        ok_mask = 0
        for i, p in enumerate(parts):
            if fits(p, m):
                ok_mask |= 1 << i

        @lru_cache(maxsize=None)
        def packable(mask):
            dims = [(parts[i].width, parts[i].length) for i in range(n) if mask >> i & 1]
            return grid_pack(dims, m.width, m.length)

        @lru_cache(maxsize=None)
        def best(mask, left=cap):
            if mask == 0:
                return 0.0
            if mask & ~ok_mask or left == 0:
                return float("inf")
            low = mask & -mask
            rest = mask ^ low
            out = float("inf")
            sub = rest
            while True:
                block = sub | low
                if packable(block):
                    idx = [i for i in range(n) if block >> i & 1]
                    t = m.batch_time(sum(parts[i].volume for i in idx), max(parts[i].height for i in idx))
                    out = min(out, t + best(mask ^ block, left - 1))
                if sub == 0:
                    break
                sub = (sub - 1) & rest
            return out

        return best

    tables = [machine_table(m) for m in machines]
    best_val = float("inf")
    for assign in product(range(len(machines)), repeat=n):
        masks = [0] * len(machines)
        for i, k in enumerate(assign):
            masks[k] |= 1 << i
        val = max(tables[k](masks[k]) for k in range(len(machines)))
        best_val = min(best_val, val)
    return best_val


def bin_packing_optimum(dims, W, L):
    """Minimum number of W x L bins for rotatable rectangles (tiny inputs)."""
    n = len(dims)
    full = (1 << n) - 1

    @lru_cache(maxsize=None)
    def packable(mask):
        return grid_pack([dims[i] for i in range(n) if mask >> i & 1], W, L)

    @lru_cache(maxsize=None)
    def best(mask):
        if mask == 0:
            return 0
        low = mask & -mask
        rest = mask ^ low
        out = n + 1
        sub = rest
        while True:
            block = sub | low
            if packable(block):
                out = min(out, 1 + best(mask ^ block))
            if sub == 0:
                break
            sub = (sub - 1) & rest
        return out

    return best(full)


def random_instance(rng, max_parts=7, max_machines=2, max_dim=8, min_parts=1, min_machine_dim=3):
    """Small random instance with integer dimensions; every part fits some machine."""
    from ampack.model import Instance, Machine, Part

    n = rng.randint(min_parts, max_parts)
    machines = [Machine(k, rng.randint(min_machine_dim, max_dim), rng.randint(min_machine_dim, max_dim), max_dim,
                        round(rng.uniform(0.5, 2.0), 3), round(rng.uniform(0.01, 0.1), 4),
                        round(rng.uniform(0.05, 0.5), 3))
                for k in range(rng.randint(1, max_machines))]
    parts = []
    while len(parts) < n:
        w, l, h = rng.randint(1, max_dim), rng.randint(1, max_dim), rng.randint(1, max_dim)
        p = Part(len(parts), w, l, h, round(w * l * h * rng.uniform(0.3, 1.0), 3))
        if any(fits(p, m) for m in machines):
            parts.append(p)
    return Instance(parts, machines)
