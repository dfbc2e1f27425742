"""Boolean function representations and witness machinery.

Two models coexist and are never conflated:

* TruthTableFunction — a dense ±1 table over n bits, the exact engine for
  spectra, influences, and enumeration-based minimal witnesses.
* QueryFunction — a stateful querier that requests bit positions until it
  declares a value.  The set of positions it read is always a witness for
  the declared value; that algorithmic witness is what the Monte Carlo
  estimators use.

Queriers are generator factories: ``factory(aux_rng)`` yields 1-based
positions, receives ±1 answers through ``send``, and returns the final
value.  ``aux_rng`` is a ``random.Random`` carrying the algorithm's own
randomness, kept separate from the input stream.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Generator, Iterator

import numpy as np

from .bitops import assignment_of_index, index_of_assignment, mask_of, positions_of
from .bitstream import LazyInput, derive_seed

DEFAULT_BUDGET = 10**6
TABLE_CAP = 24
ENUM_CAP = 20


class ProtocolError(RuntimeError):
    """A querier violated its contract (repeated or invalid request)."""


class TruthTableFunction:
    """A ±1 function of the first n bits, stored as a dense table.

    Index bit j-1 set means ω_j = -1 (see bitops module docstring).
    """

    __slots__ = ("n", "table")

    def __init__(self, n: int, table):
        if n < 0 or n > TABLE_CAP:
            raise ValueError(f"truth tables support 0 <= n <= {TABLE_CAP}, got {n}")
        t = np.asarray(table, dtype=np.int8)
        if t.shape != (1 << n,):
            raise ValueError(f"table must have length 2^{n}, got {t.shape}")
        if not np.all(np.abs(t) == 1):
            raise ValueError("table entries must be ±1")
        self.n = n
        self.table = t
        self.table.setflags(write=False)

    @classmethod
    def from_callable(cls, n: int, fn: Callable) -> "TruthTableFunction":
        vals = [fn(assignment_of_index(i, n)) for i in range(1 << n)]
        return cls(n, vals)

    def eval_index(self, idx: int) -> int:
        return int(self.table[idx])

    def __call__(self, assignment) -> int:
        if len(assignment) != self.n:
            raise ValueError(f"assignment length {len(assignment)} != n={self.n}")
        return int(self.table[index_of_assignment(assignment)])

    def mean(self) -> float:
        return float(self.table.mean(dtype=np.float64))

    def variance(self) -> float:
        m = self.mean()
        return 1.0 - m * m


def eval_table(f: TruthTableFunction, assignment) -> int:
    return f(assignment)


@dataclass(frozen=True)
class WitnessRecord:
    bits: tuple[int, ...]  # sorted positions
    value: int

    @property
    def max_w(self) -> int:
        return self.bits[-1] if self.bits else 0


@dataclass(frozen=True)
class EvaluationOutcome:
    value: int | None  # None = undetermined (budget exhausted)
    witness: WitnessRecord | None
    queries_spent: int

    @property
    def determined(self) -> bool:
        return self.value is not None


@dataclass
class QueryFunction:
    """A function given by a querier, plus the budget that caps one run."""

    querier: Callable[[random.Random], Generator[int, int, int]]
    query_budget: int = DEFAULT_BUDGET
    name: str = ""


def eval_query(
    f: QueryFunction,
    stream,
    aux_seed: int = 0,
    budget: int | None = None,
) -> EvaluationOutcome:
    """Drive a querier against a bit stream.

    Returns the declared value together with the queried set (always a
    witness), or an undetermined outcome when the budget runs out.
    """
    cap = f.query_budget if budget is None else budget
    if cap < 1:
        raise ValueError("query budget must be >= 1")
    gen = f.querier(random.Random(aux_seed))
    seen: dict[int, int] = {}
    try:
        pos = next(gen)
        while True:
            if not isinstance(pos, int) or pos < 1:
                raise ProtocolError(f"querier requested invalid position {pos!r}")
            if pos in seen:
                raise ProtocolError(f"querier re-requested position {pos}")
            if len(seen) >= cap:
                gen.close()
                return EvaluationOutcome(None, None, len(seen))
            v = stream.read(pos)
            seen[pos] = v
            pos = gen.send(v)
    except StopIteration as stop:
        value = stop.value
    bits = tuple(sorted(seen))
    return EvaluationOutcome(value, WitnessRecord(bits, value), len(seen))


def run_pinned(f: QueryFunction, pinned: dict[int, int], aux_seed: int = 0) -> int | None:
    """Run a querier answering only from `pinned`; None if it asks outside.

    This is the no-extra-queries witness check: the pinned set is a witness
    for f exactly when the querier terminates inside it.
    """
    gen = f.querier(random.Random(aux_seed))
    asked = set()
    try:
        pos = next(gen)
        while True:
            if pos in asked:
                raise ProtocolError(f"querier re-requested position {pos}")
            if pos not in pinned:
                gen.close()
                return None
            asked.add(pos)
            pos = gen.send(pinned[pos])
    except StopIteration as stop:
        return stop.value


# ---------------------------------------------------------------------------
# Minimal witnesses on truth tables
# ---------------------------------------------------------------------------


def witness_subset_order(n: int) -> Iterator[int]:
    """All subsets of [n] as masks, in the order (max element, size, lex)."""
    yield 0
    for maxw in range(1, n + 1):
        top = 1 << (maxw - 1)
        for size in range(1, maxw + 1):
            for rest in combinations(range(1, maxw), size - 1):
                yield mask_of(rest) | top


def subset_determines(f: TruthTableFunction, idx: int, mask: int) -> bool:
    """Whether the bits in `mask`, at assignment `idx`, pin f's value."""
    all_idx = np.arange(1 << f.n)
    sel = (all_idx & mask) == (idx & mask)
    vals = f.table[sel]
    return bool(np.all(vals == vals[0]))


def minimal_witness(f: TruthTableFunction, assignment) -> WitnessRecord:
    """Least witness subset under the (max, size, lex) order, verified by
    checking f is constant over every completion."""
    if f.n > ENUM_CAP:
        raise ValueError(f"witness enumeration supports n <= {ENUM_CAP}, got {f.n}")
    idx = index_of_assignment(assignment)
    for mask in witness_subset_order(f.n):
        if subset_determines(f, idx, mask):
            return WitnessRecord(positions_of(mask), f.eval_index(idx))
    raise AssertionError("unreachable: the full set always determines f")


# ---------------------------------------------------------------------------
# Determinedness on partial assignments (shared by scan/random-order queriers)
# ---------------------------------------------------------------------------


def partial_determines(f: TruthTableFunction, known: dict[int, int]) -> tuple[bool, int]:
    """Whether the known bits already pin f, and the pinned value if so."""
    mask = 0
    fixed = 0
    for p, v in known.items():
        if p <= f.n:
            mask |= 1 << (p - 1)
            if v == -1:
                fixed |= 1 << (p - 1)
    all_idx = np.arange(1 << f.n)
    vals = f.table[(all_idx & mask) == fixed]
    v0 = int(vals[0])
    if np.all(vals == v0):
        return True, v0
    return False, 0


def sequential_querier(f: TruthTableFunction, budget: int = DEFAULT_BUDGET) -> QueryFunction:
    """Scan bits 1, 2, ... stopping as soon as the prefix pins the value."""

    def factory(aux: random.Random):
        known: dict[int, int] = {}
        while True:
            done, val = partial_determines(f, known)
            if done:
                return val
            j = len(known) + 1
            known[j] = yield j

    return QueryFunction(factory, budget, name="sequential")


# ---------------------------------------------------------------------------
# Finite Boolean approximation of a query function
# ---------------------------------------------------------------------------


def boolean_approx(f: QueryFunction, m: int, aux_seed: int = 0) -> TruthTableFunction:
    """The m-bit function equal to f wherever the m-prefix alone is a
    witness (the querier stays inside [m]) and -1 elsewhere."""
    if m > ENUM_CAP:
        raise ValueError(f"boolean approximation supports m <= {ENUM_CAP}, got {m}")
    table = np.full(1 << m, -1, dtype=np.int8)
    for idx in range(1 << m):
        pinned = {j + 1: -1 if (idx >> j) & 1 else 1 for j in range(m)}
        val = run_pinned(f, pinned, aux_seed)
        if val is not None:
            table[idx] = val
    return TruthTableFunction(m, table)


# ---------------------------------------------------------------------------
# Witness-moment estimation
# ---------------------------------------------------------------------------


def knowability_moment(
    f: QueryFunction, p: float, samples: int, seed: int = 0
):
    """Monte Carlo estimate of E[(max W)^p] for the algorithmic witness."""
    from . import mc

    if p <= 0:
        raise ValueError("moment exponent must be positive")
    if samples < 1:
        raise ValueError("need at least one sample")
    vals = []
    undet = 0
    for s in range(samples):
        stream = LazyInput(derive_seed(seed, s, 0))
        out = eval_query(f, stream, aux_seed=derive_seed(seed, s, 1))
        if not out.determined:
            undet += 1
            continue
        vals.append(float(out.witness.max_w) ** p)
    return mc.from_values(vals, undetermined=undet)


def max_witness_samples(
    f: QueryFunction, samples: int, seed: int = 0
) -> tuple[list[int], int]:
    """Raw max-W samples (and the undetermined count) for reuse across
    several moment/tail statistics without re-running the querier."""
    vals: list[int] = []
    undet = 0
    for s in range(samples):
        stream = LazyInput(derive_seed(seed, s, 0))
        out = eval_query(f, stream, aux_seed=derive_seed(seed, s, 1))
        if out.determined:
            vals.append(out.witness.max_w)
        else:
            undet += 1
    return vals, undet
