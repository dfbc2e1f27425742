"""Bit-twiddling helpers for truth-table indices and frequency masks.

Truth-table convention used across the package: entry index encodes the
assignment (ω_1..ω_n) with bit j-1 of the index set iff ω_j = -1, so index
0 is the all-ones assignment and χ_S(index) = (-1)^popcount(index & mask).
Frequency sets S ⊆ [n] are n-bit masks under the same bit layout.
"""

from __future__ import annotations

import numpy as np


def mask_of(positions) -> int:
    """Mask for a set of 1-based positions."""
    m = 0
    for p in positions:
        if p < 1:
            raise ValueError(f"positions are 1-based, got {p}")
        m |= 1 << (p - 1)
    return m


def positions_of(mask: int) -> tuple[int, ...]:
    """Sorted 1-based positions of a mask."""
    out = []
    p = 1
    while mask:
        if mask & 1:
            out.append(p)
        mask >>= 1
        p += 1
    return tuple(out)


def index_of_assignment(assignment) -> int:
    """Table index of a ±1 assignment (ω_1..ω_n)."""
    idx = 0
    for j, v in enumerate(assignment):
        if v == -1:
            idx |= 1 << j
        elif v != 1:
            raise ValueError(f"assignment entries must be ±1, got {v}")
    return idx


def assignment_of_index(idx: int, n: int) -> tuple[int, ...]:
    return tuple(-1 if (idx >> j) & 1 else 1 for j in range(n))


def popcount_array(a: np.ndarray) -> np.ndarray:
    """Per-element popcount of a nonnegative integer array (SWAR, 64-bit)."""
    v = a.astype(np.uint64)
    v = v - ((v >> np.uint64(1)) & np.uint64(0x5555555555555555))
    v = (v & np.uint64(0x3333333333333333)) + (
        (v >> np.uint64(2)) & np.uint64(0x3333333333333333)
    )
    v = (v + (v >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    with np.errstate(over="ignore"):
        v = (v * np.uint64(0x0101010101010101)) >> np.uint64(56)
    return v.astype(np.int64)
