"""Auditors for proved inequalities and qualitative diagnostics.

Exact-arithmetic audits (truth tables) must never fail — these are
theorems — so any violation beyond float tolerance is a build-breaking
finding.  Monte Carlo audits pass at 3σ of pooled error.  Diagnostics for
results with unspecified universal constants only report values and check
qualitative direction.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

from . import mc
from .bitstream import LazyInput, derive_seed
from .funcmodel import QueryFunction, TruthTableFunction, eval_query
from .influence import InfluenceProfile, influences_fourier, pivotal_set_query
from .spectral import Spectrum, low_level_energy, xi

EXACT_TOLERANCE = 1e-9

# Natural-log KKL constant: the weaker of the proof's two case constants,
# with the log-base conversion folded in so the audit is sound for either
# reading of the statement's log.
KKL_CONSTANT = min(1.0 / (11.0 * math.log(2.0)), 1.0 / math.log(1000.0))
FINITARY_KKL_CONSTANT = 0.5 * KKL_CONSTANT


@dataclass(frozen=True)
class AuditReport:
    """One checked inequality: lhs `relation` rhs, with provenance."""

    name: str
    lhs: float
    rhs: float
    relation: str  # ">=" or "<="
    slack: float  # signed margin, >= -tolerance means pass
    passed: bool
    tolerance: float
    inputs: dict = field(default_factory=dict)


def make_audit(name, lhs, rhs, relation, tolerance, inputs) -> AuditReport:
    slack = (lhs - rhs) if relation == ">=" else (rhs - lhs)
    return AuditReport(
        name=name,
        lhs=float(lhs),
        rhs=float(rhs),
        relation=relation,
        slack=float(slack),
        passed=bool(slack >= -tolerance),
        tolerance=float(tolerance),
        inputs=inputs,
    )


def audits_to_json(reports) -> str:
    return json.dumps([asdict(r) for r in reports], indent=2)


# ---------------------------------------------------------------------------
# Exact audits on influence profiles
# ---------------------------------------------------------------------------


def poincare_check(profile: InfluenceProfile, variance: float) -> AuditReport:
    """Total influence dominates the variance."""
    return make_audit(
        "poincare",
        profile.total,
        variance,
        ">=",
        EXACT_TOLERANCE,
        {"kind": "exact", "variance": variance},
    )


def kkl_check(profile: InfluenceProfile, variance: float) -> AuditReport:
    """Total influence >= c · Var · ln(1/max-influence), natural logs."""
    delta = profile.max_influence
    if delta <= 0.0:
        # constant function: the bound is vacuous
        return make_audit(
            "kkl", profile.total, 0.0, ">=", EXACT_TOLERANCE, {"kind": "exact", "delta": 0.0}
        )
    rhs = KKL_CONSTANT * variance * math.log(1.0 / delta)
    return make_audit(
        "kkl",
        profile.total,
        rhs,
        ">=",
        EXACT_TOLERANCE,
        {"kind": "exact", "delta": delta, "constant": KKL_CONSTANT, "variance": variance},
    )


def exact_audit_suite(f: TruthTableFunction) -> list[AuditReport]:
    from .influence import influences_exact

    profile = influences_exact(f)
    variance = f.variance()
    return [poincare_check(profile, variance), kkl_check(profile, variance)]


# ---------------------------------------------------------------------------
# Monte Carlo audits for query functions
# ---------------------------------------------------------------------------


def _witness_pivotal_pass(f: QueryFunction, samples: int, seed: int):
    """One sampling pass collecting (max W, pivotal set, value) triples."""
    rows = []
    undet = 0
    for s in range(samples):
        stream = LazyInput(derive_seed(seed, s, 0))
        aux = derive_seed(seed, s, 1)
        out = eval_query(f, stream, aux_seed=aux)
        if not out.determined:
            undet += 1
            continue
        piv, _ = pivotal_set_query(f, stream, aux)
        rows.append((out.witness.max_w, piv, out.value))
    return rows, undet


def _batched(rows, batches: int):
    size = max(1, len(rows) // batches)
    for i in range(0, len(rows) - size + 1, size):
        yield rows[i : i + size]


def _maxinf_ingredients(rows):
    per_bit_counts: dict[int, int] = {}
    for _, piv, _ in rows:
        for k in piv:
            per_bit_counts[k] = per_bit_counts.get(k, 0) + 1
    n = len(rows)
    per_bit = {k: c / n for k, c in per_bit_counts.items()}
    if per_bit:
        kmax, imax = max(per_bit.items(), key=lambda kv: kv[1])
    else:
        kmax, imax = 0, 0.0
    return per_bit, kmax, imax


def _rhs_maxinf(rows, p: float) -> float:
    n = len(rows)
    nu = sum(w for w, _, _ in rows) / n
    mu = sum(w**p for w, _, _ in rows) / n
    total_inf = sum(len(piv) for _, piv, _ in rows) / n
    return total_inf / nu - (1.0 / (p - 1.0)) * mu / nu**p


def _rhs_finitary_kkl(rows, p: float) -> float:
    n = len(rows)
    nu = sum(w for w, _, _ in rows) / n
    mu = sum(w**p for w, _, _ in rows) / n
    mean = sum(v for _, _, v in rows) / n
    var = 1.0 - mean * mean
    return (
        FINITARY_KKL_CONSTANT * var * math.log(nu) / nu
        - (1.0 / (p - 1.0)) * mu / nu**p
    )


def _mc_max_influence_audit(
    name: str, f: QueryFunction, p: float, samples: int, seed: int, rhs_of, batches: int = 16
) -> AuditReport:
    if p <= 1:
        raise ValueError("these bounds need p > 1")
    rows, undet = _witness_pivotal_pass(f, samples, seed)
    if not rows:
        raise RuntimeError("all samples undetermined; cannot audit")
    per_bit, kmax, lhs = _maxinf_ingredients(rows)
    lhs_err = math.sqrt(max(lhs * (1 - lhs), 0.0) / len(rows))
    rhs_batches = [rhs_of(b, p) for b in _batched(rows, batches)]
    rhs_est = mc.batch_means(rhs_batches)
    rhs = rhs_of(rows, p)
    tol = 3.0 * mc.pooled_stderr(lhs_err, rhs_est.stderr)
    return make_audit(
        name,
        lhs,
        rhs,
        ">=",
        tol,
        {
            "kind": "monte-carlo",
            "p": p,
            "samples": len(rows),
            "undetermined": undet,
            "argmax_bit": kmax,
            "lhs_stderr": lhs_err,
            "rhs_stderr": rhs_est.stderr,
        },
    )


def maxinf_lemma_check(f: QueryFunction, p: float, samples: int, seed: int = 0) -> AuditReport:
    """max_k I_k >= I/E[max W] - (1/(p-1)) E[(max W)^p]/E[max W]^p."""
    return _mc_max_influence_audit("maxinf-lemma", f, p, samples, seed, _rhs_maxinf)


def finitary_kkl_check(f: QueryFunction, p: float, samples: int, seed: int = 0) -> AuditReport:
    """max_k I_k >= (c/2)·Var·ln(ν)/ν - (1/(p-1))·E[(max W)^p]/ν^p."""
    return _mc_max_influence_audit("finitary-kkl", f, p, samples, seed, _rhs_finitary_kkl)


# ---------------------------------------------------------------------------
# Diagnostics (universal constants unavailable: report + qualitative check)
# ---------------------------------------------------------------------------


def _monotone_nonincreasing(xs, slack: float = 1e-12) -> bool:
    return all(b <= a + slack for a, b in zip(xs, xs[1:]))


def kk_diagnostic(members, epsilon: float) -> dict:
    """(H, Ξ) pairs along a family of spectra.

    The quantitative inequality Ξ <= a·H^{bε} has unspecified universal
    constants, so this only reports pairs and flags the one checkable
    direction: a family whose H clearly tends to zero must show Ξ
    decreasing toward zero.
    """
    rows = []
    for name, spec in members:
        rows.append(
            {
                "name": name,
                "h": influences_fourier(spec).h,
                "xi": xi(spec, epsilon),
            }
        )
    hs = [r["h"] for r in rows]
    xis = [r["xi"] for r in rows]
    h_vanishing = len(hs) >= 2 and _monotone_nonincreasing(hs) and hs[-1] <= 0.5 * hs[0]
    xi_decreasing = len(xis) >= 2 and xis[-1] < xis[0]
    return {
        "epsilon": epsilon,
        "rows": rows,
        "h_vanishing": h_vanishing,
        "xi_decreasing": xi_decreasing,
        "qualitative_violation": bool(h_vanishing and not xi_decreasing),
    }


def low_level_energy_diagnostic(members, cap_rule=None) -> list[dict]:
    """Low-level spectral mass Σ_{1<=|S|<=cap} f̂(S)² per family member.

    `members` is a sequence of (name, spectrum, mu) with mu the moment
    scale; the default cap is ceil(ln mu) (at least 1).
    """
    if cap_rule is None:
        cap_rule = lambda mu: max(1, math.ceil(math.log(max(mu, math.e))))
    rows = []
    for name, spec, mu in members:
        cap = cap_rule(mu)
        rows.append(
            {
                "name": name,
                "mu": mu,
                "cap": cap,
                "low_energy": low_level_energy(spec, cap),
                "h": influences_fourier(spec).h,
            }
        )
    return rows
