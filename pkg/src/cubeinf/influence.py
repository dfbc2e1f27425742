"""Pivotal sets, influences, total influence, and the H functional.

Exact computations run on truth tables (and cross-check against the
Fourier formulas); query functions get Monte Carlo estimators that rerun
the querier in full on flipped streams — the query path may change after
a flip, so transcripts are never reused.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import mc
from .bitops import index_of_assignment
from .bitstream import FlipView, LazyInput, derive_seed
from .funcmodel import QueryFunction, TruthTableFunction, eval_query
from .spectral import Spectrum


@dataclass(frozen=True)
class InfluenceProfile:
    """Per-bit influences plus the derived aggregates.

    total = Σ_k I_k,  h = Σ_k I_k²,  max_influence = max_k I_k.
    `stderr` is present for sampled profiles and None for exact ones.
    """

    per_bit: dict[int, float]
    total: float
    h: float
    max_influence: float
    stderr: dict[int, float] | None = None

    @classmethod
    def from_per_bit(cls, per_bit: dict[int, float], stderr=None) -> "InfluenceProfile":
        vals = list(per_bit.values())
        return cls(
            per_bit=dict(per_bit),
            total=float(sum(vals)),
            h=float(sum(v * v for v in vals)),
            max_influence=float(max(vals)) if vals else 0.0,
            stderr=stderr,
        )


def pivotal_set(f: TruthTableFunction, assignment) -> frozenset[int]:
    """Bits whose flip changes f on this assignment (exact, n flips)."""
    idx = index_of_assignment(assignment)
    v = f.eval_index(idx)
    return frozenset(
        k for k in range(1, f.n + 1) if f.eval_index(idx ^ (1 << (k - 1))) != v
    )


def influences_exact(f: TruthTableFunction) -> InfluenceProfile:
    """I_k = (# assignments where k is pivotal) / 2^n, vectorized."""
    idx = np.arange(1 << f.n)
    per_bit = {}
    for k in range(1, f.n + 1):
        flipped = f.table[idx ^ (1 << (k - 1))]
        per_bit[k] = float(np.mean(f.table != flipped))
    return InfluenceProfile.from_per_bit(per_bit)


def influences_fourier(s: Spectrum) -> InfluenceProfile:
    """I_k = Σ_{S ∋ k} f̂(S)²; total = Σ_S |S| f̂(S)².

    Works on any spectrum, Boolean or not — this is the L² extension of
    the influence functional.
    """
    per_bit = {k: 0.0 for k in range(1, s.n + 1)}
    for m, c in s.coeffs.items():
        mm = int(m)
        c2 = c * c
        while mm:
            low = mm & -mm
            per_bit[low.bit_length()] += c2
            mm ^= low
    return InfluenceProfile.from_per_bit(per_bit)


def discrete_derivative(s: Spectrum, k: int) -> Spectrum:
    """Spectrum of (f(ω) - f(ω^k)) / 2: exactly the S ∋ k coefficients."""
    bit = 1 << (k - 1)
    return Spectrum(s.n, {m: c for m, c in s.coeffs.items() if m & bit})


# ---------------------------------------------------------------------------
# Monte Carlo estimators for query functions
# ---------------------------------------------------------------------------


def influence_mc(f: QueryFunction, k: int, samples: int, seed: int = 0) -> mc.MCEstimate:
    """Frequency of f(ω) != f(ω^k) over coupled evaluations."""
    hits = 0
    undet = 0
    done = 0
    for s in range(samples):
        stream = LazyInput(derive_seed(seed, s, 0))
        aux = derive_seed(seed, s, 1)
        a = eval_query(f, stream, aux_seed=aux)
        b = eval_query(f, FlipView(stream, k), aux_seed=aux)
        if not (a.determined and b.determined):
            undet += 1
            continue
        done += 1
        if a.value != b.value:
            hits += 1
    return mc.from_frequency(hits, done, undetermined=undet)


def pivotal_set_query(
    f: QueryFunction, stream, aux_seed: int
) -> tuple[frozenset[int], int | None]:
    """Pivotal bits of a query function on one input.

    Pivotality is testable only inside the queried witness (every pivotal
    bit lies in every witness set, so nothing outside can be pivotal).
    Returns (pivotal bits, value); value None flags an undetermined run.
    """
    out = eval_query(f, stream, aux_seed=aux_seed)
    if not out.determined:
        return frozenset(), None
    piv = set()
    for k in out.witness.bits:
        again = eval_query(f, FlipView(stream, k), aux_seed=aux_seed)
        if not again.determined or again.value != out.value:
            piv.add(k)
    return frozenset(piv), out.value


def total_influence_mc(f: QueryFunction, samples: int, seed: int = 0) -> mc.MCEstimate:
    """I(f) = E|pivotal set|, sampled via witnessed-region flips."""
    vals = []
    undet = 0
    for s in range(samples):
        stream = LazyInput(derive_seed(seed, s, 0))
        piv, value = pivotal_set_query(f, stream, derive_seed(seed, s, 1))
        if value is None:
            undet += 1
            continue
        vals.append(float(len(piv)))
    return mc.from_values(vals, undetermined=undet)


def h_combinatorial(f, samples: int, seed: int = 0) -> mc.MCEstimate:
    """E|P(ω) ∩ P(ω̃)| over independent input pairs.

    Accepts a TruthTableFunction (exact pivotal sets per sample) or a
    QueryFunction (witnessed-region pivotal sets).
    """
    vals = []
    undet = 0
    if isinstance(f, TruthTableFunction):
        from .bitstream import bit_matrix, sample_seeds

        seeds_a = sample_seeds(seed, samples, 0)
        seeds_b = sample_seeds(seed, samples, 1)
        weights = 1 << np.arange(f.n)
        ia = ((bit_matrix(seeds_a, f.n) < 0) * weights).sum(axis=1)
        ib = ((bit_matrix(seeds_b, f.n) < 0) * weights).sum(axis=1)
        for a_idx, b_idx in zip(ia, ib):
            pa = _pivotal_by_index(f, int(a_idx))
            pb = _pivotal_by_index(f, int(b_idx))
            vals.append(float(len(pa & pb)))
    elif isinstance(f, QueryFunction):
        for s in range(samples):
            pa, va = pivotal_set_query(f, LazyInput(derive_seed(seed, s, 0)), derive_seed(seed, s, 2))
            pb, vb = pivotal_set_query(f, LazyInput(derive_seed(seed, s, 1)), derive_seed(seed, s, 3))
            if va is None or vb is None:
                undet += 1
                continue
            vals.append(float(len(pa & pb)))
    else:
        raise TypeError(f"unsupported function type {type(f)!r}")
    return mc.from_values(vals, undetermined=undet)


def _pivotal_by_index(f: TruthTableFunction, idx: int) -> set[int]:
    v = f.eval_index(idx)
    return {
        k for k in range(1, f.n + 1) if f.eval_index(idx ^ (1 << (k - 1))) != v
    }


# ---------------------------------------------------------------------------
# Knowability bounds on influences
# ---------------------------------------------------------------------------


def knowability_bound_report(
    f: QueryFunction,
    p: float,
    ks,
    samples: int,
    seed: int = 0,
    q: float | None = None,
    cutoff: int | None = None,
) -> dict:
    """Check I_k <= E[(max W)^p] / k^p at the given bits, and optionally
    the tail bound Σ_{k>cutoff} I_k^q <= E[(max W)^p]^q cutoff^{1-pq}/(pq-1)
    over the supplied bits beyond the cutoff.  Violations beyond 3σ are
    findings, not errors.
    """
    if p <= 0:
        raise ValueError("p must be positive")
    from .funcmodel import max_witness_samples

    ws, undet = max_witness_samples(f, samples, derive_seed(seed, 0xA))
    moment = mc.from_values([float(w) ** p for w in ws], undetermined=undet)
    rows = []
    violations = []
    inf_estimates = {}
    for k in ks:
        est = influence_mc(f, k, samples, derive_seed(seed, k))
        inf_estimates[k] = est
        bound = moment.mean / k**p
        bound_err = moment.stderr / k**p
        slack = bound - est.mean
        ok = slack >= -3.0 * mc.pooled_stderr(est.stderr, bound_err)
        rows.append(
            {
                "bit": k,
                "influence": est.mean,
                "influence_stderr": est.stderr,
                "bound": bound,
                "bound_stderr": bound_err,
                "ok": ok,
            }
        )
        if not ok:
            violations.append(k)
    report = {
        "p": p,
        "moment": moment,
        "per_bit": rows,
        "violations": violations,
        "undetermined": undet,
    }
    if q is not None and cutoff is not None:
        if p * q <= 1:
            raise ValueError("tail bound needs p*q > 1")
        tail_bits = [k for k in ks if k > cutoff]
        lhs = sum(inf_estimates[k].mean ** q for k in tail_bits)
        lhs_err = sum(
            q * max(inf_estimates[k].mean, 1e-12) ** (q - 1) * inf_estimates[k].stderr
            for k in tail_bits
        )
        rhs = moment.mean**q * cutoff ** (1 - p * q) / (p * q - 1)
        rhs_err = (
            q * max(moment.mean, 1e-12) ** (q - 1) * moment.stderr
        ) * cutoff ** (1 - p * q) / (p * q - 1)
        report["tail"] = {
            "q": q,
            "cutoff": cutoff,
            "bits": tail_bits,
            "lhs": lhs,
            "rhs": rhs,
            "ok": rhs - lhs >= -3.0 * mc.pooled_stderr(lhs_err, rhs_err),
        }
    return report


def mean_mc(f: QueryFunction, samples: int, seed: int = 0) -> mc.MCEstimate:
    """Sample mean of f itself (used for variance estimates in audits)."""
    vals = []
    undet = 0
    for s in range(samples):
        out = eval_query(
            f, LazyInput(derive_seed(seed, s, 0)), aux_seed=derive_seed(seed, s, 1)
        )
        if not out.determined:
            undet += 1
            continue
        vals.append(float(out.value))
    return mc.from_values(vals, undetermined=undet)
