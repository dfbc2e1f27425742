"""The function zoo: named Boolean functions used throughout the suite.

Each entry is available as a dense truth table (when finitely supported),
as a query function (when it has a natural querier), or both.  Spec
strings like ``maj:5``, ``parity:1,2,3``, ``tribes:3x4``, ``selector``,
``spliced:2,4,8``, ``blockfn``, ``rwhit:10`` construct entries; these are
the formats the CLI accepts.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from .bitops import mask_of, popcount_array
from .funcmodel import (
    DEFAULT_BUDGET,
    QueryFunction,
    TruthTableFunction,
    sequential_querier,
)


@dataclass
class ZooFunction:
    name: str
    table: TruthTableFunction | None = None
    query: QueryFunction | None = None

    def require_table(self) -> TruthTableFunction:
        if self.table is None:
            raise ValueError(f"{self.name} has no finite truth table")
        return self.table

    def require_query(self) -> QueryFunction:
        if self.query is None:
            raise ValueError(f"{self.name} has no querier")
        return self.query


def _with_scan_query(name: str, table: TruthTableFunction) -> ZooFunction:
    return ZooFunction(name, table=table, query=sequential_querier(table))


def dictator() -> ZooFunction:
    """f = ω_1."""
    return _with_scan_query("dictator", TruthTableFunction(1, [1, -1]))


def parity(positions) -> ZooFunction:
    """The character χ_S: the product of the bits in S."""
    pos = tuple(sorted(positions))
    if not pos:
        raise ValueError("parity needs at least one position")
    n = pos[-1]
    mask = mask_of(pos)
    idx = np.arange(1 << n)
    table = np.where(popcount_array(idx & mask) % 2 == 0, 1, -1)
    name = "parity:" + ",".join(map(str, pos))
    return _with_scan_query(name, TruthTableFunction(n, table))


def majority(n: int) -> ZooFunction:
    """Majority vote over n bits (n odd)."""
    if n % 2 == 0 or n < 1:
        raise ValueError(f"majority needs odd n >= 1, got {n}")
    idx = np.arange(1 << n)
    minus_ones = popcount_array(idx)
    table = np.where(minus_ones * 2 < n, 1, -1)
    return _with_scan_query(f"maj:{n}", TruthTableFunction(n, table))


def tribes(blocksize: int, blocks: int) -> ZooFunction:
    """+1 iff some block of `blocksize` consecutive bits is all +1."""
    if blocksize < 1 or blocks < 1:
        raise ValueError("tribes needs blocksize >= 1 and blocks >= 1")
    n = blocksize * blocks
    idx = np.arange(1 << n)
    won = np.zeros(len(idx), dtype=bool)
    for b in range(blocks):
        block_mask = ((1 << blocksize) - 1) << (b * blocksize)
        won |= (idx & block_mask) == 0  # no -1 bits in the block
    table = np.where(won, 1, -1)
    return _with_scan_query(f"tribes:{blocksize}x{blocks}", TruthTableFunction(n, table))


def selector(budget: int = DEFAULT_BUDGET) -> ZooFunction:
    """Sequential selector: ω_2 if ω_1 = 1, else ω_4 if ω_3 = 1, and so on.

    Finitary with P(max W = 2n) = 2^{-n}, hence E[max W] = 4.
    """

    def factory(aux: random.Random):
        k = 1
        while True:
            gate = yield 2 * k - 1
            if gate == 1:
                payload = yield 2 * k
                return payload
            k += 1

    return ZooFunction("selector", query=QueryFunction(factory, budget, "selector"))


def spliced_selector(block_sizes, budget: int = DEFAULT_BUDGET) -> ZooFunction:
    """Selector with gate n replaced by a block of a_n bits whose product
    plays the role of the gate.  `block_sizes` is a finite sequence; the
    sizes repeat the last entry beyond its end.  Fast-growing sizes kill
    p-knowability while the function stays finitary.
    """
    sizes = tuple(int(a) for a in block_sizes)
    if not sizes or any(a < 1 for a in sizes):
        raise ValueError("block sizes must be positive")

    def size(k: int) -> int:
        return sizes[k - 1] if k <= len(sizes) else sizes[-1]

    def factory(aux: random.Random):
        pos = 1
        k = 1
        while True:
            a = size(k)
            prod = 1
            for off in range(a):
                prod *= yield pos + off
            if prod == 1:
                payload = yield pos + a
                return payload
            pos += a + 1
            k += 1

    name = "spliced:" + ",".join(map(str, sizes))
    return ZooFunction(name, query=QueryFunction(factory, budget, name))


def block_function(budget: int = DEFAULT_BUDGET) -> ZooFunction:
    """+1 iff some block (block k has k bits) is all +1; not finitary —
    on minus outputs the querier never halts, so evaluation runs into the
    budget and reports undetermined."""

    def factory(aux: random.Random):
        pos = 1
        k = 1
        while True:
            good = True
            for off in range(k):
                if (yield pos + off) != 1:
                    good = False
                    break
            if good:
                return 1
            pos += k
            k += 1

    return ZooFunction("blockfn", query=QueryFunction(factory, budget, "blockfn"))


def rw_hitting(threshold: int, budget: int = DEFAULT_BUDGET) -> ZooFunction:
    """Sign of the boundary (+threshold before -threshold) first hit by the
    simple walk whose steps are the bits."""
    if threshold < 1:
        raise ValueError("threshold must be >= 1")

    def factory(aux: random.Random):
        s = 0
        i = 1
        while True:
            s += yield i
            if abs(s) == threshold:
                return 1 if s > 0 else -1
            i += 1

    name = f"rwhit:{threshold}"
    return ZooFunction(name, query=QueryFunction(factory, budget, name))


def constant(value: int) -> ZooFunction:
    if value not in (-1, 1):
        raise ValueError("constant must be ±1")
    return ZooFunction(f"const:{value}", table=TruthTableFunction(0, [value]))


# ---------------------------------------------------------------------------
# Spec-string construction (the CLI surface) and families
# ---------------------------------------------------------------------------


class SpecError(ValueError):
    """An unparseable or out-of-range function spec string."""


def from_spec(spec: str) -> ZooFunction:
    head, _, arg = spec.strip().partition(":")
    head = head.lower()
    try:
        if head in ("dict", "dictator"):
            return dictator()
        if head == "maj":
            return majority(int(arg))
        if head == "parity":
            return parity(int(p) for p in arg.split(","))
        if head == "tribes":
            b, _, k = arg.partition("x")
            return tribes(int(b), int(k))
        if head == "selector":
            return selector()
        if head == "spliced":
            return spliced_selector(int(a) for a in arg.split(","))
        if head == "blockfn":
            return block_function()
        if head == "rwhit":
            return rw_hitting(int(arg))
        if head == "const":
            return constant(int(arg))
    except SpecError:
        raise
    except (ValueError, TypeError) as exc:
        raise SpecError(f"bad function spec {spec!r}: {exc}") from exc
    raise SpecError(f"unknown function spec {spec!r}")


SPEC_FORMATS = [
    ("dictator", "f = first bit"),
    ("maj:<n>", "majority over n bits, n odd"),
    ("parity:<p1,p2,...>", "product of the listed bits"),
    ("tribes:<blocksize>x<blocks>", "OR of AND-blocks"),
    ("selector", "sequential selector (gate/payload pairs)"),
    ("spliced:<a1,a2,...>", "selector with gate blocks of the given sizes"),
    ("blockfn", "non-finitary block function (growing blocks)"),
    ("rwhit:<k>", "random-walk ±k boundary hitting sign"),
    ("const:<±1>", "constant function"),
]


def tribes_family() -> list[ZooFunction]:
    """Tribes members at n = 8, 12, 16 with log-scaled block sizes."""
    return [tribes(2, 4), tribes(3, 4), tribes(4, 4)]


def dictator_family(count: int = 4) -> list[ZooFunction]:
    return [dictator() for _ in range(count)]


def parity_family(ns=(2, 3, 4, 5, 6)) -> list[ZooFunction]:
    return [parity(range(1, n + 1)) for n in ns]
