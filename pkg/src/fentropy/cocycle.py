"""Cocycles into the finite-set group, the binary odometer, and skew products.

The odometer is the integers acting on {0,1}^N (fair coins, least
significant bit at coordinate 1) by binary addition with carry. Its carry
cocycle ``c(k, x)`` is the set of coordinates changed by adding ``k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Protocol, Sequence

import numpy as np

from ._rng import derive_seed, uniform
from .bernoulli import BernoulliParam, LazyPoint, act_finset, log_rn, phi
from .engine import EntropyEstimate, NonsingularSystem, summarize
from .finset import EMPTY, FINSET, FinSet, FiniteSupportMeasure, Group, INTEGER, IntegerGroup

CARRY_CAP = 1 << 10


class CarryOverflow(RuntimeError):
    """A carry or borrow ran past the safety cap; a fair-coin point does this with probability 2^-1024."""


class Cocycle(Protocol):
    def evaluate(self, g, x) -> FinSet: ...


def _odometer_diff(k: int, x: LazyPoint) -> FinSet:
    """Coordinates changed when ``k`` is added to ``x`` (borrow subtraction for k < 0)."""
    r = abs(k)
    sign = 1 if k >= 0 else -1
    carry = 0
    n = 1
    limit = r.bit_length() + CARRY_CAP
    mask = 0
    while r or carry:
        if n > limit:
            raise CarryOverflow(f"carry passed coordinate {limit} while adding {k}")
        b = x.coordinate(n)
        kb = r & 1
        if sign > 0:
            s = b + kb + carry
            new, carry = s & 1, s >> 1
        else:
            d = b - kb - carry
            new, carry = (d + 2, 1) if d < 0 else (d, 0)
        if new != b:
            mask |= 1 << n
        r >>= 1
        n += 1
    return FinSet.from_mask(mask)


def odometer_add(k: int, x: LazyPoint) -> LazyPoint:
    """Add the integer ``k`` to the 2-adic integer ``x``; only coordinates up to the last carry are read."""
    return act_finset(_odometer_diff(k, x), x)


def odometer_cocycle(k: int, x: LazyPoint) -> FinSet:
    return _odometer_diff(k, x)


def odometer_flip_moments(k: int) -> tuple[float, float]:
    """Exact (E|c(k, x)|, E max c(k, x)) for fair-coin x.

    The low ``L = bit_length(|k|)`` bits are enumerated. A carry (or borrow)
    out of them then runs through a geometric stretch of ones (or zeros),
    flipping n further coordinates with probability 2^-n: 2 more flips on
    average, and the top flipped coordinate sits at L + 2 on average.
    """
    if k == 0:
        return 0.0, 0.0
    m = abs(k)
    L = m.bit_length()
    size = top = 0.0
    for low in range(1 << L):
        if k > 0:
            s = low + m
            out, new = s >> L, s & ((1 << L) - 1)
        else:
            d = low - m
            out, new = int(d < 0), d % (1 << L)
        diff = (new ^ low) << 1  # bit j of low is coordinate j + 1
        if out:
            size += diff.bit_count() + 2
            top += L + 2
        else:
            size += diff.bit_count()
            top += diff.bit_length() - 1
    return size / (1 << L), top / (1 << L)


@dataclass(frozen=True)
class OdometerSystem:
    """The measure-preserving adding machine on fair-coin sequences."""

    @property
    def group(self) -> IntegerGroup:
        return INTEGER

    @property
    def measure_preserving(self) -> bool:
        return True

    def sample_state(self, seed: int) -> LazyPoint:
        return LazyPoint(seed, 0.5)

    def apply(self, k: int, x: LazyPoint) -> LazyPoint:
        return odometer_add(k, x)

    def log_rn_inv(self, k: int, x: LazyPoint) -> float:
        return 0.0


@dataclass(frozen=True)
class OdometerCocycle:
    def evaluate(self, k: int, x: LazyPoint) -> FinSet:
        return odometer_cocycle(k, x)


@dataclass(frozen=True)
class TrivialCocycle:
    def evaluate(self, g, x) -> FinSet:
        return EMPTY


@dataclass(frozen=True)
class CocycleReport:
    passed: bool
    trials: int
    witness: tuple | None = None


def cocycle_identity_check(
    c: Cocycle,
    base: NonsingularSystem,
    trials: int,
    seed: int = 42,
    elements: Sequence | None = None,
) -> CocycleReport:
    """Check c(gh, x) == c(g, hx) + c(h, x) exactly on random triples.

    ``g`` and ``h`` are drawn uniformly from ``elements`` (the integers in
    [-8, 8] by default). The first failing ``(g, h, x)`` is returned as the
    witness.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    group = base.group
    if elements is None:
        if not isinstance(group, IntegerGroup):
            raise ValueError("pass the elements to sample from")
        elements = range(-8, 9)
    elements = list(elements)
    for t in range(trials):
        s = derive_seed(seed, t)
        g = elements[int(uniform(s, 0) * len(elements))]
        h = elements[int(uniform(s, 1) * len(elements))]
        x = base.sample_state(derive_seed(s, 2))
        lhs = c.evaluate(group.op(g, h), x)
        rhs = c.evaluate(g, base.apply(h, x)) ^ c.evaluate(h, x)
        if lhs != rhs:
            return CocycleReport(False, t + 1, (g, h, x))
    return CocycleReport(True, trials)


@dataclass(frozen=True)
class SkewSystem:
    """g (x, w) = (g x, c(g, x) w) on base x fibre, the fibre carrying omega_p.

    The base must preserve its measure, so the log-derivative comes from the
    fibre alone: log d g^{-1}_*(eta x omega)/d(eta x omega) at (x, w) is
    log d c(g,x)^{-1}_* omega / d omega at w, and c(g,x)^{-1} = c(g,x).
    """

    base: NonsingularSystem
    cocycle: Cocycle
    p: float

    @property
    def group(self) -> Group:
        return self.base.group

    @property
    def measure_preserving(self) -> bool:
        return self.p == 0.5

    def sample_state(self, seed: int) -> tuple[Any, LazyPoint]:
        return self.base.sample_state(derive_seed(seed, 0)), LazyPoint(derive_seed(seed, 1), self.p)

    def apply(self, g, state):
        x, w = state
        return self.base.apply(g, x), act_finset(self.cocycle.evaluate(g, x), w)

    def log_rn_inv(self, g, state) -> float:
        x, w = state
        return log_rn(self.cocycle.evaluate(g, x), w, self.p)


def build_skew(base: NonsingularSystem, c: Cocycle, p: float | BernoulliParam) -> SkewSystem:
    if not base.measure_preserving:
        raise ValueError("skew products are only built over measure-preserving bases")
    p = p.p if isinstance(p, BernoulliParam) else BernoulliParam(p).p
    return SkewSystem(base, c, p)


def cocycle_sizes(
    mu: FiniteSupportMeasure, c: Cocycle, base: NonsingularSystem, n_samples: int, seed: int
) -> np.ndarray:
    """Per-sample ``sum_g mu(g) |c(g, x_i)|`` over base states seeded by ``(seed, i)``."""
    atoms = [(g, w) for g, w in mu.atoms if w]
    out = np.empty(n_samples)
    for i in range(n_samples):
        x = base.sample_state(derive_seed(seed, i))
        out[i] = sum(w * len(c.evaluate(g, x)) for g, w in atoms)
    return out


def skew_entropy_exact(
    mu: FiniteSupportMeasure,
    c: Cocycle,
    base: NonsingularSystem,
    p: float | BernoulliParam,
    n_base_samples: int,
    seed: int = 42,
) -> EntropyEstimate:
    """Skew-product entropy as phi(p) times the mean cocycle size.

    Integrating the fibre entropy over the base reduces the mu-entropy to
    phi(p) sum_g mu(g) E|c(g, x)|; only the base expectation is sampled.
    """
    if not base.measure_preserving:
        raise ValueError("base must preserve its measure")
    if n_base_samples < 1:
        raise ValueError("need at least one base sample")
    est = summarize(cocycle_sizes(mu, c, base, n_base_samples, seed), seed, mu.tail)
    f = phi(p)
    return EntropyEstimate(f * est.mean, f * est.stderr, est.n_samples, seed, est.tail)


def odometer_skew_entropy(mu: FiniteSupportMeasure, p: float | BernoulliParam) -> float:
    """Closed form phi(p) sum_k mu(k) E|c(k, x)| for the odometer carry cocycle."""
    if mu.group != INTEGER:
        raise ValueError("need a measure on the integers")
    return phi(p) * math.fsum(w * odometer_flip_moments(k)[0] for k, w in mu.atoms)
