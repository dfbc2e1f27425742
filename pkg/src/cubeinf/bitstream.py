"""Deterministic lazily-realized ±1 bit streams and their couplings.

Every stream value is a pure function of (seed, position), computed by a
counter-based keyed hash (SplitMix64 finalizer).  Reads are therefore
replayable in any order, and Monte Carlo estimators can hand each sample
its own independent stream derived from (master seed, sample index)
without any coordination between workers.

Positions are 1-based throughout.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# substream tags for the two auxiliary streams a noise coupling needs
_KEEP_TAG = 0x6B656570
_FRESH_TAG = 0x66726573


def mix64(x: int) -> int:
    """SplitMix64 finalizer on a 64-bit integer."""
    z = (x + _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def mix64_array(x: np.ndarray) -> np.ndarray:
    """Vectorized SplitMix64 finalizer on uint64 arrays."""
    with np.errstate(over="ignore"):
        z = (x + np.uint64(_GOLDEN)).astype(np.uint64)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
        return z ^ (z >> np.uint64(31))


def derive_seed(seed: int, *path: int) -> int:
    """Derive a child seed from a parent seed and an index path.

    Chained mixing: each path component is hashed and folded in.  Used to
    give every (sample, substream) pair its own independent stream.
    """
    s = seed & _MASK
    for ix in path:
        s = mix64(s ^ mix64(ix & _MASK))
    return s


def _word(seed: int, i: int) -> int:
    # positions are folded into 64 bits; collisions need i ~ 2^64
    return mix64(seed ^ mix64(i & _MASK))


def bit_at(seed: int, i: int) -> int:
    """The ±1 value of stream `seed` at position i (pure function)."""
    return 1 - 2 * (_word(seed, i) >> 63)


def uniform_at(seed: int, i: int) -> float:
    """A uniform [0,1) variate attached to (seed, position)."""
    return (_word(seed, i) >> 11) * 2.0**-53


class LazyInput:
    """A lazily realized uniform ±1 sequence with optional forced bits.

    Reading the same position twice returns the same value; without
    overrides the value at position i depends only on (seed, i), never on
    read order.  Overrides beat generation, which is what witness
    enumeration and prefix pinning need.
    """

    __slots__ = ("seed", "override", "_cache")

    def __init__(self, seed: int, override: dict[int, int] | None = None):
        self.seed = seed & _MASK
        if override:
            bad = {i: v for i, v in override.items() if v not in (-1, 1) or i < 1}
            if bad:
                raise ValueError(f"overrides must map positions >= 1 to ±1, got {bad}")
            self.override = dict(override)
        else:
            self.override = {}
        self._cache: dict[int, int] = {}

    def read(self, i: int) -> int:
        if i < 1:
            raise ValueError(f"bit positions are 1-based, got {i}")
        v = self.override.get(i)
        if v is not None:
            return v
        v = self._cache.get(i)
        if v is None:
            v = bit_at(self.seed, i)
            self._cache[i] = v
        return v

    def realized_count(self) -> int:
        return len(self._cache)


class FlipView:
    """The base stream with exactly one position negated."""

    __slots__ = ("base", "k")

    def __init__(self, base, k: int):
        if k < 1:
            raise ValueError(f"flip position must be >= 1, got {k}")
        self.base = base
        self.k = k

    def read(self, i: int) -> int:
        v = self.base.read(i)
        return -v if i == self.k else v


class _NoisedView:
    __slots__ = ("coupling",)

    def __init__(self, coupling: "NoiseCoupling"):
        self.coupling = coupling

    def read(self, i: int) -> int:
        c = self.coupling
        if uniform_at(c._keep_seed, i) >= c.epsilon:
            return c.base.read(i)
        return bit_at(c._fresh_seed, i)


class NoiseCoupling:
    """Coupled pair (base, noised): each position of the noised leg keeps
    the base bit with probability 1-ε and is resampled fair otherwise, so
    the two legs agree with probability 1 - ε/2 per position and the
    noised leg is marginally uniform.

    The keep/fresh randomness is derived from the base seed, so the
    coupling is itself a deterministic, replayable function of
    (base seed, ε).
    """

    __slots__ = ("base", "epsilon", "_keep_seed", "_fresh_seed", "noised")

    def __init__(self, base: LazyInput, epsilon: float):
        if not 0.0 <= epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
        self.base = base
        self.epsilon = float(epsilon)
        self._keep_seed = derive_seed(base.seed, _KEEP_TAG)
        self._fresh_seed = derive_seed(base.seed, _FRESH_TAG)
        self.noised = _NoisedView(self)


def couple(base: LazyInput, epsilon: float) -> NoiseCoupling:
    return NoiseCoupling(base, epsilon)


def flip(base, k: int) -> FlipView:
    return FlipView(base, k)


# ---------------------------------------------------------------------------
# Vectorized batch realizations.  These produce exactly the same values the
# scalar LazyInput / NoiseCoupling path would, which is what lets estimators
# switch between per-sample queriers and numpy batch code freely.
# ---------------------------------------------------------------------------


def sample_seeds(master: int, count: int, tag: int = 0) -> np.ndarray:
    """Per-sample stream seeds derive_seed(master, s, tag) as uint64."""
    return np.array(
        [derive_seed(master, s, tag) for s in range(count)], dtype=np.uint64
    )


def _word_matrix(seeds: np.ndarray, positions: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        return mix64_array(seeds[:, None] ^ mix64_array(positions)[None, :])


def bit_matrix(seeds: np.ndarray, n: int, start: int = 1) -> np.ndarray:
    """±1 matrix; row s equals LazyInput(seeds[s]).read(start..start+n-1)."""
    pos = np.arange(start, start + n, dtype=np.uint64)
    w = _word_matrix(seeds, pos)
    return (1 - 2 * (w >> np.uint64(63)).astype(np.int64)).astype(np.int8)


def bit_column(seeds: np.ndarray, i: int) -> np.ndarray:
    """±1 vector: LazyInput(seeds[s]).read(i) for every sample s."""
    with np.errstate(over="ignore"):
        w = mix64_array(seeds ^ np.uint64(mix64(i & _MASK)))
    return (1 - 2 * (w >> np.uint64(63)).astype(np.int64)).astype(np.int8)


def coupling_seeds(seeds: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(keep, fresh) substream seeds matching NoiseCoupling's derivation."""
    keep = np.array([derive_seed(int(s), _KEEP_TAG) for s in seeds], dtype=np.uint64)
    fresh = np.array([derive_seed(int(s), _FRESH_TAG) for s in seeds], dtype=np.uint64)
    return keep, fresh


def noised_bit_matrix(
    seeds: np.ndarray, n: int, epsilon: float, start: int = 1
) -> tuple[np.ndarray, np.ndarray]:
    """(base, noised) ±1 matrices replicating couple(...) per sample."""
    base = bit_matrix(seeds, n, start)
    keep_s, fresh_s = coupling_seeds(seeds)
    pos = np.arange(start, start + n, dtype=np.uint64)
    u = (_word_matrix(keep_s, pos) >> np.uint64(11)) * 2.0**-53
    fresh = (1 - 2 * (_word_matrix(fresh_s, pos) >> np.uint64(63)).astype(np.int64)).astype(np.int8)
    return base, np.where(u >= epsilon, base, fresh).astype(np.int8)
