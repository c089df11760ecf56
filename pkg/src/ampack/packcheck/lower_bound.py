"""Square-cutting bin lower bound for rotatable rectangles."""
from __future__ import annotations

from typing import Iterable, Sequence

from ..model import Machine, Part


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def cut_into_squares(parts: Iterable[Part]) -> list[int]:
    """Greedily cut every rectangle into squares and return their sides.

    The largest inscribed square is removed repeatedly, i.e. the Euclidean
    algorithm on (long side, short side).
    """
    sides = []
    for p in parts:
        a, b = max(p.width, p.length), min(p.width, p.length)
        while b:
            sides.extend([b] * (a // b))
            a, b = b, a % b
    return sides


def _bound_for_threshold(sides: Sequence[int], W: int, H: int, q: int) -> int:
    # W is the long bin side, H the short one; comparisons against halves
    # are done on doubled values to stay in integers.
    s1 = s2 = s3 = s4 = 0
    sum3 = 0
    res2 = 0
    count_cap2 = 0
    area = 0
    waste = 0
    step = H // 2 + 1
    for s in sides:
        if s > W - q:
            s1 += 1
            continue
        if 2 * s > W:
            s2 += 1
            res2 += W - s
            count_cap2 += (W - s) // step
            area += s * s
            if s > H - q:
                waste += s * (H - s)
        elif 2 * s > H:
            s3 += 1
            sum3 += s
            area += s * s
            if s > H - q:
                waste += s * (H - s)
        elif s >= q:
            s4 += 1
            area += s * s
    per_bin = W // step
    lb_tilde = s2 + max(_ceil_div(max(0, sum3 - res2), W), _ceil_div(max(0, s3 - count_cap2), per_bin))
    A = W * H
    return s1 + lb_tilde + max(0, _ceil_div(area + waste - A * lb_tilde, A))


def lb_dmv(parts: Sequence[Part], machine: Machine) -> int:
    """Lower bound on the number of bins of ``machine`` needed for ``parts``.

    Parts are cut into squares, which removes the rotation choice; for each
    integer threshold ``q`` the squares are classified into large (alone in a
    bin), over-half (at most one per bin across the short side) and small
    items, and a counting plus area argument bounds the bin count.
    """
    if not parts:
        return 0
    W, H = max(machine.width, machine.length), min(machine.width, machine.length)
    sides = cut_into_squares(parts)
    return max(_bound_for_threshold(sides, W, H, q) for q in range(H // 2 + 1))
