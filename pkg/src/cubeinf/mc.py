"""Small Monte Carlo bookkeeping shared by all estimators."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class MCEstimate:
    """A sample mean with its normal-approximation standard error.

    `undetermined` counts evaluations that hit the query budget and were
    excluded from the mean; a nonzero count flags the estimate.
    """

    mean: float
    stderr: float
    samples: int
    undetermined: int = 0

    @property
    def flagged(self) -> bool:
        return self.undetermined > 0

    def interval(self, sigmas: float = 3.0) -> tuple[float, float]:
        return (self.mean - sigmas * self.stderr, self.mean + sigmas * self.stderr)


def from_values(values, undetermined: int = 0) -> MCEstimate:
    n = len(values)
    if n == 0:
        return MCEstimate(math.nan, math.inf, 0, undetermined)
    mean = sum(values) / n
    if n == 1:
        return MCEstimate(mean, math.inf, 1, undetermined)
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return MCEstimate(mean, math.sqrt(var / n), n, undetermined)


def from_frequency(hits: int, n: int, undetermined: int = 0) -> MCEstimate:
    if n == 0:
        return MCEstimate(math.nan, math.inf, 0, undetermined)
    p = hits / n
    return MCEstimate(p, math.sqrt(max(p * (1 - p), 0.0) / n), n, undetermined)


def pooled_stderr(a: float, b: float) -> float:
    return math.sqrt(a * a + b * b)


def agree(a: MCEstimate, expected: float, expected_stderr: float = 0.0, sigmas: float = 3.0) -> bool:
    """Whether estimate and reference agree within `sigmas` pooled errors."""
    return abs(a.mean - expected) <= sigmas * pooled_stderr(a.stderr, expected_stderr)


def batch_means(per_batch_values) -> MCEstimate:
    """Estimate + stderr from batch-level statistics (captures covariances
    between jointly estimated quantities inside each batch)."""
    return from_values(list(per_batch_values))
