"""Exact Fourier–Walsh analysis of finitely supported functions.

Spectra are sparse maps from frequency sets (n-bit masks, bit j-1 for
position j) to real coefficients.  The dense 2^n representation only
appears transiently inside the butterfly transform.  Coefficients with
absolute value below DROP_TOLERANCE are dropped after transforms so that
float noise never pollutes sparse spectra; identity checks budget for
this (Parseval tests use 1e-10 against a 1e-12 drop).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .bitops import mask_of, popcount_array, positions_of
from .funcmodel import TruthTableFunction

DROP_TOLERANCE = 1e-12
TRANSFORM_CAP = 20


@dataclass(frozen=True)
class Spectrum:
    """Sparse Fourier–Walsh coefficients of a function of the first n bits."""

    n: int
    coeffs: dict[int, float] = field(default_factory=dict)

    def coeff(self, mask: int) -> float:
        return self.coeffs.get(mask, 0.0)

    def coeff_at(self, positions) -> float:
        return self.coeff(mask_of(positions))

    def squared_mass(self) -> float:
        return sum(c * c for c in self.coeffs.values())

    def mean(self) -> float:
        return self.coeff(0)

    def variance(self) -> float:
        return self.squared_mass() - self.mean() ** 2


def _sparsify(n: int, dense: np.ndarray) -> Spectrum:
    keep = np.nonzero(np.abs(dense) >= DROP_TOLERANCE)[0]
    return Spectrum(n, {int(m): float(dense[m]) for m in keep})


def fwht(values: np.ndarray) -> np.ndarray:
    """Unnormalized in-place Walsh–Hadamard butterfly; returns its input."""
    m = len(values)
    h = 1
    while h < m:
        values = values.reshape(-1, 2, h)
        a = values[:, 0, :].copy()
        b = values[:, 1, :]
        values[:, 0, :] = a + b
        values[:, 1, :] = a - b
        values = values.reshape(m)
        h *= 2
    return values


def transform(f: TruthTableFunction) -> Spectrum:
    """Fourier coefficients f̂(S) = E[f·χ_S], all S ⊆ [n]."""
    if f.n > TRANSFORM_CAP:
        raise ValueError(f"transform supports n <= {TRANSFORM_CAP}, got {f.n}")
    dense = fwht(f.table.astype(np.float64)) / (1 << f.n)
    return _sparsify(f.n, dense)


def transform_values(n: int, values) -> Spectrum:
    """Transform of an arbitrary real-valued table (not necessarily ±1)."""
    if n > TRANSFORM_CAP:
        raise ValueError(f"transform supports n <= {TRANSFORM_CAP}, got {n}")
    v = np.array(values, dtype=np.float64)
    if v.shape != (1 << n,):
        raise ValueError(f"need 2^{n} values")
    return _sparsify(n, fwht(v) / (1 << n))


def inverse_values(s: Spectrum) -> np.ndarray:
    """Dense table of function values recovered from the spectrum."""
    dense = np.zeros(1 << s.n, dtype=np.float64)
    for m, c in s.coeffs.items():
        dense[m] = c
    return fwht(dense)


def energy_profile(s: Spectrum) -> np.ndarray:
    """Squared spectral mass per level: entry i sums f̂(S)^2 over |S| = i."""
    levels = np.zeros(s.n + 1)
    for m, c in s.coeffs.items():
        levels[int(m).bit_count()] += c * c
    return levels


def project_prefix(s: Spectrum, m: int) -> Spectrum:
    """Projection onto functions of the first m bits: keep S ⊆ [m]."""
    mask = (1 << m) - 1
    return Spectrum(s.n, {S: c for S, c in s.coeffs.items() if S & ~mask == 0})


def apply_noise(s: Spectrum, rho: float) -> Spectrum:
    """Noise operator: multiply the coefficient at S by rho^|S|."""
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    out = {}
    for m, c in s.coeffs.items():
        v = c * rho ** int(m).bit_count()
        if abs(v) >= DROP_TOLERANCE:
            out[m] = v
    return Spectrum(s.n, out)


def noise_correlation(s: Spectrum, epsilon: float) -> float:
    """E[f(ω) f(ω^ε)] = Σ_S f̂(S)^2 (1-ε)^|S|."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    r = 1.0 - epsilon
    return sum(c * c * r ** int(m).bit_count() for m, c in s.coeffs.items())


def xi(s: Spectrum, epsilon: float) -> float:
    """Noise covariance: E[f(ω) f(ω^ε)] - E[f]^2.  Zero for every ε is
    the single-function mark of total sensitivity."""
    return noise_correlation(s, epsilon) - s.mean() ** 2


def tail_energy(s: Spectrum, k: int) -> float:
    """Σ_{i >= k} E(i): spectral mass at levels k and above."""
    if k < 0:
        raise ValueError("level must be >= 0")
    return sum(c * c for m, c in s.coeffs.items() if int(m).bit_count() >= k)


def low_level_energy(s: Spectrum, cap: int) -> float:
    """Σ_{1 <= |S| <= cap} f̂(S)^2 — the mass that must vanish along a
    noise-sensitive family."""
    return sum(
        c * c for m, c in s.coeffs.items() if 1 <= int(m).bit_count() <= cap
    )


def lp_norm(values: np.ndarray, p: float) -> float:
    """L^p norm under the uniform measure, by exact enumeration."""
    if p < 1:
        raise ValueError("p >= 1 required")
    return float(np.mean(np.abs(values) ** p) ** (1.0 / p))


# ---------------------------------------------------------------------------
# Monte Carlo cross-check for the spectral noise covariance
# ---------------------------------------------------------------------------


def noise_correlation_mc(f: TruthTableFunction, epsilon: float, samples: int, seed: int = 0):
    """Coupled-stream estimate of E[f(ω) f(ω^ε)], vectorized over samples.

    Uses the same (seed, position) realization as LazyInput/NoiseCoupling,
    so the estimate is replayable bit for bit.
    """
    from . import mc
    from .bitstream import noised_bit_matrix, sample_seeds

    seeds = sample_seeds(seed, samples, 0)
    base, noised = noised_bit_matrix(seeds, f.n, epsilon)
    weights = 1 << np.arange(f.n)
    ib = ((base < 0) * weights).sum(axis=1)
    inz = ((noised < 0) * weights).sum(axis=1)
    prod = f.table[ib].astype(np.float64) * f.table[inz]
    mean = float(prod.mean())
    stderr = float(prod.std(ddof=1) / np.sqrt(samples))
    return mc.MCEstimate(mean, stderr, samples)


def xi_mc(f: TruthTableFunction, epsilon: float, samples: int, seed: int = 0):
    """Coupled estimate of the noise covariance Ξ (correlation minus
    squared-mean, the mean taken exactly from the table)."""
    from . import mc

    est = noise_correlation_mc(f, epsilon, samples, seed)
    return mc.MCEstimate(est.mean - f.mean() ** 2, est.stderr, est.samples)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def to_json(s: Spectrum) -> str:
    records = [
        {"set": list(positions_of(m)), "coeff": c}
        for m, c in sorted(s.coeffs.items())
    ]
    return json.dumps({"n": s.n, "coeffs": records}, indent=2)


def from_json(text: str) -> Spectrum:
    obj = json.loads(text)
    coeffs = {mask_of(rec["set"]): float(rec["coeff"]) for rec in obj["coeffs"]}
    return Spectrum(int(obj["n"]), coeffs)
