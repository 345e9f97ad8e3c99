"""Bernoulli product measures on {0,1}^N and the symmetric-difference action of finite sets.

Points of the infinite product are :class:`LazyPoint` objects: coordinate
``n`` of a point with seed ``s`` is a pure function of ``(s, n)``, so a
point is never materialized beyond the coordinates an operation touches.
All logarithms are natural; entropies are in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist
from typing import Callable, Protocol, Sequence

import numpy as np

from ._rng import derive_seed, mix64_np, uniform, uniform_np
from .finset import EMPTY, FINSET, FinSet, FiniteSupportMeasure, FinsetGroup

SINGULAR = "evidence-of-singularity"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class BernoulliParam:
    p: float

    def __post_init__(self):
        p = float(self.p)
        if not 0.0 < p < 1.0:
            raise ValueError(f"Bernoulli parameter must lie in (0, 1), got {self.p!r}")
        object.__setattr__(self, "p", p)

    @property
    def log_odds(self) -> float:
        """log(p / (1 - p)), computed as 2 atanh(2p - 1) to stay accurate near 1/2."""
        return 2.0 * math.atanh(2.0 * self.p - 1.0)


def _param(p: float | BernoulliParam) -> BernoulliParam:
    return p if isinstance(p, BernoulliParam) else BernoulliParam(p)


def phi(p: float | BernoulliParam) -> float:
    """(2p - 1) log(p / (1 - p)): the KL divergence between B(p) and B(1 - p)."""
    bp = _param(p)
    return (2.0 * bp.p - 1.0) * bp.log_odds


@dataclass(frozen=True)
class LazyPoint:
    """A point of {0,1}^N drawn from the product of B(p), then flipped on ``flips``.

    The underlying draw has coordinate ``n`` equal to 1 iff
    ``uniform(seed, n) < p``; ``flips`` records the symmetric differences
    applied since.
    """

    seed: int
    p: float = 0.5
    flips: FinSet = EMPTY

    def coordinate(self, n: int) -> int:
        if n < 1:
            raise ValueError("coordinates are indexed from 1")
        bit = 1 if uniform(self.seed, n) < self.p else 0
        return bit ^ ((self.flips.mask >> n) & 1)

    def coordinates(self, indices: Sequence[int]) -> list[int]:
        return [self.coordinate(n) for n in indices]

    def prefix(self, m: int) -> tuple[int, ...]:
        return tuple(self.coordinate(n) for n in range(1, m + 1))

    def flipped(self, t: FinSet) -> LazyPoint:
        return LazyPoint(self.seed, self.p, self.flips ^ t)


def act_finset(t: FinSet, x: LazyPoint) -> LazyPoint:
    """Symmetric difference: flip the coordinates of ``x`` listed in ``t``."""
    return x.flipped(t)


def log_rn(t: FinSet, x: LazyPoint, p: float | BernoulliParam) -> float:
    """log of d(t_* omega_p)/d omega_p at ``x``.

    Under t_* omega_p the coordinates in ``t`` are B(1 - p), so each
    contributes (1 - 2 x_n) log(p / (1 - p)). Since t is an involution this
    is also the log-derivative of the pushforward under t^{-1}.
    """
    lo = _param(p).log_odds
    total = 0.0
    for n in t:
        total += (1 - 2 * x.coordinate(n)) * lo
    return total


def log_rn_bits(t: FinSet, bits: np.ndarray, p: float | BernoulliParam) -> np.ndarray:
    """``log_rn`` for a batch of bit patterns; ``bits[i, n - 1]`` is coordinate ``n`` of pattern ``i``."""
    bits = np.atleast_2d(bits)
    if t.max > bits.shape[1]:
        raise ValueError(f"patterns cover coordinates 1..{bits.shape[1]}, set reaches {t.max}")
    lo = _param(p).log_odds
    cols = np.fromiter(t, dtype=np.intp) - 1
    return ((1 - 2 * bits[:, cols].astype(np.int64)) * lo).sum(axis=1)


def exact_entropy_finset_action(mu: FiniteSupportMeasure, p: float | BernoulliParam) -> float:
    """mu-entropy of the Bernoulli measure: phi(p) times the mean size under mu."""
    if not isinstance(mu.group, FinsetGroup):
        raise ValueError("need a measure on finite sets")
    mean_size = math.fsum(w * len(t) for t, w in mu.atoms)
    return phi(p) * mean_size


@dataclass(frozen=True)
class BernoulliFinsetSystem:
    """Finite sets acting on ({0,1}^N, omega_p) by symmetric difference."""

    p: float

    def __post_init__(self):
        object.__setattr__(self, "p", _param(self.p).p)

    @property
    def group(self) -> FinsetGroup:
        return FINSET

    @property
    def measure_preserving(self) -> bool:
        return self.p == 0.5

    def sample_state(self, seed: int) -> LazyPoint:
        return LazyPoint(seed, self.p)

    def apply(self, t: FinSet, x: LazyPoint) -> LazyPoint:
        return act_finset(t, x)

    def log_rn_inv(self, t: FinSet, x: LazyPoint) -> float:
        return log_rn(t, x, self.p)


# ---------------------------------------------------------------- separation test


class PointSource(Protocol):
    """Draws ``n_samples`` points and reports their bits at ``indices`` as a 0/1 array."""

    def coordinates(self, n_samples: int, indices: Sequence[int], seed: int) -> np.ndarray: ...


@dataclass(frozen=True)
class BernoulliSource:
    """i.i.d. points of omega_q; point ``i`` of a draw with seed ``s`` has seed ``derive_seed(s, i)``."""

    q: float

    def point(self, seed: int, i: int) -> LazyPoint:
        return LazyPoint(derive_seed(seed, i), self.q)

    def coordinates(self, n_samples: int, indices: Sequence[int], seed: int) -> np.ndarray:
        seeds = mix64_np(np.uint64(derive_seed(seed)), np.arange(n_samples, dtype=np.uint64))
        idx = np.asarray(indices, dtype=np.uint64)
        return (uniform_np(seeds[:, None], idx[None, :]) < self.q).astype(np.int8)


@dataclass(frozen=True)
class LazyPointSource:
    """Adapts any ``(seed, i) -> LazyPoint`` callable; evaluates coordinates one by one."""

    draw: Callable[[int, int], LazyPoint]

    def coordinates(self, n_samples: int, indices: Sequence[int], seed: int) -> np.ndarray:
        out = np.empty((n_samples, len(indices)), dtype=np.int8)
        for i in range(n_samples):
            out[i] = self.draw(seed, i).coordinates(indices)
        return out


@dataclass(frozen=True)
class SeparationReport:
    mean: float
    stderr: float
    upper_bound: float
    p: float
    alpha: float
    n_samples: int
    verdict: str


def separation_test(
    source: PointSource,
    indices: Sequence[int],
    p: float | BernoulliParam,
    n_samples: int,
    alpha: float = 0.01,
    seed: int = 42,
) -> SeparationReport:
    """Statistical evidence that the law of ``source`` is singular to omega_p.

    Each sample contributes the frequency of ones over ``indices``; under
    omega_p that frequency has mean p. A one-sided normal upper confidence
    bound below p is reported as evidence of singularity. The test never
    concludes absolute continuity.
    """
    p = _param(p).p
    if p <= 0.5:
        raise ValueError("the separation test needs p > 1/2")
    if not indices:
        raise ValueError("indices must be nonempty")
    if any(n < 1 for n in indices):
        raise ValueError("coordinates are indexed from 1")
    if n_samples < 30:
        raise ValueError("need at least 30 samples for the normal approximation")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")

    bits = source.coordinates(n_samples, list(indices), seed)
    freq = bits.mean(axis=1)
    mean = float(freq.mean())
    stderr = float(freq.std(ddof=1) / math.sqrt(n_samples))
    upper = mean + NormalDist().inv_cdf(1.0 - alpha) * stderr
    verdict = SINGULAR if upper < p else INCONCLUSIVE
    return SeparationReport(mean, stderr, upper, p, alpha, n_samples, verdict)
