"""Revealment estimation and the truncation/lift wrapper algorithms.

The revealment of an algorithm at bit i is the probability the algorithm
reads bit i.  The function's own revealment is an infimum over all
algorithms and is not computable; every estimate here upper-bounds it,
which keeps the per-level energy audit sound.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from . import mc
from .bitstream import LazyInput, derive_seed
from .funcmodel import (
    QueryFunction,
    TruthTableFunction,
    eval_query,
    partial_determines,
    run_pinned,
)
from .inequalities import AuditReport, make_audit
from .spectral import Spectrum, energy_profile


@dataclass(frozen=True)
class RevealmentEstimate:
    """Per-bit query frequencies over a tracked range of positions.

    The supremum is taken over the tracked range only; `tail_excess`
    estimates P(max W > tracked range), which bounds how much any
    untracked bit could matter.
    """

    per_bit: dict[int, tuple[float, float]]  # position -> (frequency, stderr)
    sup_estimate: float
    sup_stderr: float
    tracked_range: int
    tail_excess: mc.MCEstimate
    samples: int
    undetermined: int = 0


def estimate_revealment(
    alg: QueryFunction, samples: int, track_k: int, seed: int = 0
) -> RevealmentEstimate:
    """Per-bit query frequencies of `alg` over independent runs."""
    if track_k < 1:
        raise ValueError("track_k must be >= 1")
    counts = [0] * (track_k + 1)
    beyond = 0
    undet = 0
    done = 0
    for s in range(samples):
        stream = LazyInput(derive_seed(seed, s, 0))
        out = eval_query(alg, stream, aux_seed=derive_seed(seed, s, 1))
        if not out.determined:
            undet += 1
            continue
        done += 1
        over = False
        for b in out.witness.bits:
            if b <= track_k:
                counts[b] += 1
            else:
                over = True
        if over:
            beyond += 1
    per_bit = {}
    sup_f, sup_e = 0.0, 0.0
    for b in range(1, track_k + 1):
        est = mc.from_frequency(counts[b], done)
        per_bit[b] = (est.mean, est.stderr)
        if est.mean > sup_f:
            sup_f, sup_e = est.mean, est.stderr
    return RevealmentEstimate(
        per_bit=per_bit,
        sup_estimate=sup_f,
        sup_stderr=sup_e,
        tracked_range=track_k,
        tail_excess=mc.from_frequency(beyond, done),
        samples=done,
        undetermined=undet,
    )


# ---------------------------------------------------------------------------
# Algorithms for truth-table functions
# ---------------------------------------------------------------------------


def random_order_algorithm(f: TruthTableFunction, budget: int | None = None) -> QueryFunction:
    """Query the n bits in a uniformly random order, stopping as soon as
    the answers pin the value."""

    def factory(aux: random.Random):
        order = list(range(1, f.n + 1))
        aux.shuffle(order)
        known: dict[int, int] = {}
        for j in order:
            done, val = partial_determines(f, known)
            if done:
                return val
            known[j] = yield j
        return f.eval_index(_index_from(known, f.n))

    from .funcmodel import DEFAULT_BUDGET

    return QueryFunction(factory, budget or DEFAULT_BUDGET, name="random-order")


def _index_from(known: dict[int, int], n: int) -> int:
    idx = 0
    for p, v in known.items():
        if v == -1 and p <= n:
            idx |= 1 << (p - 1)
    return idx


# ---------------------------------------------------------------------------
# Wrapper constructions between a function and its finite approximations
# ---------------------------------------------------------------------------


def truncate_algorithm(alg: QueryFunction, fn: QueryFunction, m: int) -> QueryFunction:
    """An algorithm for the m-bit approximation of the function `alg`
    decides: run `alg`; if it ever asks beyond m, abort and read all of
    [m] instead, then emit the approximation's value (the function's value
    if the prefix pins it, else -1, decided by fn's querier pinned to the
    prefix).  Its per-bit revealment exceeds alg's by at most
    P(max W(alg) > m)."""

    def factory(aux: random.Random):
        inner = alg.querier(aux)
        held: dict[int, int] = {}
        aborted = False
        value = None
        try:
            pos = next(inner)
            while True:
                if pos > m:
                    inner.close()
                    aborted = True
                    break
                held[pos] = yield pos
                pos = inner.send(held[pos])
        except StopIteration as stop:
            value = stop.value
        if not aborted:
            return value
        for j in range(1, m + 1):
            if j not in held:
                held[j] = yield j
        pinned_value = run_pinned(fn, held)
        return pinned_value if pinned_value is not None else -1

    return QueryFunction(factory, alg.query_budget, name=f"truncate[{m}]({alg.name})")


def lift_algorithm(alg_m: QueryFunction, fn: QueryFunction, m: int) -> QueryFunction:
    """An algorithm for the full function built from one for its m-bit
    approximation: run alg_m; if the bits it read witness the function
    (checked by running fn's querier pinned to them — no extra queries),
    stop with that value; otherwise scan bits from the first onward until
    the function is determined.  Its revealment exceeds alg_m's by at most
    P(max W(fn) > m)."""

    def factory(aux: random.Random):
        inner = alg_m.querier(aux)
        held: dict[int, int] = {}
        try:
            pos = next(inner)
            while True:
                held[pos] = yield pos
                pos = inner.send(held[pos])
        except StopIteration:
            pass
        value = run_pinned(fn, held)
        if value is not None:
            return value
        j = 1
        while True:
            if j not in held:
                held[j] = yield j
                value = run_pinned(fn, held)
                if value is not None:
                    return value
            j += 1

    return QueryFunction(factory, alg_m.query_budget, name=f"lift[{m}]({alg_m.name})")


# ---------------------------------------------------------------------------
# The per-level energy audit
# ---------------------------------------------------------------------------


def revealment_inequality_audit(s: Spectrum, rev: RevealmentEstimate) -> list[AuditReport]:
    """E_f(k) <= δ·k·||f||² at every level, with δ the estimated
    algorithm revealment (an upper bound on the function's, so the check
    is sound)."""
    levels = energy_profile(s)
    norm2 = s.squared_mass()
    out = []
    for k in range(1, s.n + 1):
        rhs = rev.sup_estimate * k * norm2
        tol = 3.0 * rev.sup_stderr * k * norm2
        out.append(
            make_audit(
                f"revealment-energy[k={k}]",
                float(levels[k]),
                rhs,
                "<=",
                tol,
                {
                    "kind": "spectral-vs-mc",
                    "level": k,
                    "revealment": rev.sup_estimate,
                    "revealment_stderr": rev.sup_stderr,
                    "samples": rev.samples,
                },
            )
        )
    return out
