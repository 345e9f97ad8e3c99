"""Furstenberg entropy of nonsingular actions.

Convention used by every system in the package: ``log_rn_inv(g, x)`` returns
log(d g^{-1}_* eta / d eta)(x), the integrand of the mu-entropy

    h_mu(X, eta) = sum_g mu(g) E_eta[-log_rn_inv(g, x)].

With this convention the log-derivatives satisfy the cocycle rule
``log_rn_inv(g h, x) = log_rn_inv(g, h x) + log_rn_inv(h, x)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Hashable, Protocol, Sequence

import numpy as np

from ._rng import derive_seed, uniform
from .finset import (
    CyclicGroup,
    FiniteSupportMeasure,
    Group,
    INTEGER,
    IntegerGroup,
    TableGroup,
    geometric_bar,
)

BATCH = 8192


class NonsingularSystem(Protocol):
    group: Group
    measure_preserving: bool

    def sample_state(self, seed: int) -> Any: ...

    def apply(self, g, x) -> Any: ...

    def log_rn_inv(self, g, x) -> float: ...


@dataclass(frozen=True)
class EntropyEstimate:
    mean: float
    stderr: float
    n_samples: int
    seed: int
    tail: float = 0.0


# ---------------------------------------------------------------- finite systems


def _invert(perm: np.ndarray) -> np.ndarray:
    inv = np.empty_like(perm)
    inv[perm] = np.arange(len(perm))
    return inv


@dataclass(frozen=True, eq=False)
class FiniteNonsingularSystem:
    """A group acting by permutations on ``len(eta)`` states with a positive measure ``eta``.

    Permutation arrays map a state to its image: ``perm(g)[x] == g x``. For
    the integers and cyclic groups the action is determined by ``generator``,
    the permutation of the element 1. For table groups ``perms`` must list
    every element.
    """

    eta: np.ndarray
    group: Group
    generator: np.ndarray | None = None
    perms: dict[Hashable, np.ndarray] | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        eta = np.asarray(self.eta, dtype=np.float64)
        if eta.ndim != 1 or len(eta) == 0:
            raise ValueError("eta must be a nonempty vector")
        if np.any(eta <= 0) or not np.all(np.isfinite(eta)):
            raise ValueError("eta must be strictly positive")
        if abs(math.fsum(eta) - 1.0) > 1e-12:
            raise ValueError("eta must sum to 1")
        eta.setflags(write=False)
        object.__setattr__(self, "eta", eta)
        n = len(eta)

        if isinstance(self.group, (IntegerGroup, CyclicGroup)):
            if self.generator is None:
                raise ValueError("integer and cyclic actions need a generator permutation")
            gen = self._as_perm(self.generator, n)
            object.__setattr__(self, "generator", gen)
            if isinstance(self.group, CyclicGroup):
                if not np.array_equal(self._power(gen, self.group.n), np.arange(n)):
                    raise ValueError("generator order does not divide the cyclic group order")
        elif isinstance(self.group, TableGroup):
            if self.perms is None:
                raise ValueError("table-group actions need a permutation per element")
            perms = {self.group.coerce(g): self._as_perm(p, n) for g, p in self.perms.items()}
            elems = self.group.elements()
            if set(perms) != set(elems):
                raise ValueError("perms must cover every group element")
            for a in elems:
                for b in elems:
                    if not np.array_equal(perms[a][perms[b]], perms[self.group.op(a, b)]):
                        raise ValueError(f"perms are not an action: ({a}, {b})")
            object.__setattr__(self, "perms", perms)
        else:
            raise ValueError(f"finite systems do not support {self.group.tag} groups")

    @staticmethod
    def _as_perm(p, n: int) -> np.ndarray:
        p = np.asarray(p, dtype=np.intp)
        if p.shape != (n,) or not np.array_equal(np.sort(p), np.arange(n)):
            raise ValueError("action maps must be bijections of the state set")
        p.setflags(write=False)
        return p

    @staticmethod
    def _power(gen: np.ndarray, k: int) -> np.ndarray:
        base = gen if k >= 0 else _invert(gen)
        out = np.arange(len(gen))
        for _ in range(abs(k)):
            out = base[out]
        return out

    @property
    def n_states(self) -> int:
        return len(self.eta)

    @property
    def measure_preserving(self) -> bool:
        if self.perms is not None:
            maps = list(self.perms.values())
        else:
            maps = [self.generator]
        return all(np.allclose(self.eta[p], self.eta, rtol=1e-12, atol=0.0) for p in maps)

    def perm(self, g) -> np.ndarray:
        g = self.group.coerce(g)
        if self.perms is not None:
            return self.perms[g]
        cached = self._cache.get(g)
        if cached is None:
            cached = self._power(self.generator, g)
            cached.setflags(write=False)
            self._cache[g] = cached
        return cached

    def sample_state(self, seed: int) -> int:
        u = uniform(seed, 0)
        cdf = np.cumsum(self.eta)
        return int(min(np.searchsorted(cdf, u, side="right"), self.n_states - 1))

    def apply(self, g, x: int) -> int:
        return int(self.perm(g)[x])

    def log_rn_inv(self, g, x: int) -> float:
        return float(math.log(self.eta[self.perm(g)[x]]) - math.log(self.eta[x]))

    def log_rn_inv_vector(self, g) -> np.ndarray:
        """``log_rn_inv(g, x)`` for every state: log eta(g x) - log eta(x)."""
        log_eta = np.log(self.eta)
        return log_eta[self.perm(g)] - log_eta


def two_point_swap(q: float) -> FiniteNonsingularSystem:
    """Z/2 swapping two states of masses q and 1 - q."""
    return FiniteNonsingularSystem(np.array([q, 1.0 - q]), CyclicGroup(2), generator=np.array([1, 0]))


def cyclic_shift_system(n: int) -> FiniteNonsingularSystem:
    """The integers acting on Z/n by translation, with the uniform measure."""
    if n < 1:
        raise ValueError("need n >= 1")
    return FiniteNonsingularSystem(
        np.full(n, 1.0 / n), INTEGER, generator=(np.arange(n) + 1) % n
    )


# ---------------------------------------------------------------- entropy


def exact_entropy_finite(system: FiniteNonsingularSystem, mu: FiniteSupportMeasure) -> float:
    """sum_g mu(g) sum_x eta(x) (log eta(x) - log eta(g x))."""
    if system.group != mu.group:
        raise ValueError("system and measure live on different groups")
    terms = [w * -float(np.dot(system.eta, system.log_rn_inv_vector(g))) for g, w in mu.atoms if w]
    return math.fsum(terms)


def _sample_values(system, atoms, seed: int, start: int, stop: int) -> np.ndarray:
    out = np.empty(stop - start)
    for j, i in enumerate(range(start, stop)):
        x = system.sample_state(derive_seed(seed, i))
        v = 0.0
        for g, w in atoms:
            v -= w * system.log_rn_inv(g, x)
        out[j] = v
    return out


def sample_values(
    system: NonsingularSystem,
    mu: FiniteSupportMeasure,
    n_samples: int,
    seed: int,
    workers: int = 1,
) -> np.ndarray:
    """Per-sample values ``-sum_g mu(g) log_rn_inv(g, x_i)`` with x_i seeded by ``(seed, i)``.

    All atoms share the same states. The result does not depend on
    ``workers``: each sample's state comes from its own index.
    """
    if system.group != mu.group:
        raise ValueError("system and measure live on different groups")
    if n_samples < 1:
        raise ValueError("need at least one sample")
    atoms = [(g, w) for g, w in mu.atoms if w]
    bounds = [(a, min(a + BATCH, n_samples)) for a in range(0, n_samples, BATCH)]
    if workers > 1 and len(bounds) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(
                pool.map(
                    _sample_values,
                    *zip(*[(system, atoms, seed, a, b) for a, b in bounds]),
                )
            )
    else:
        parts = [_sample_values(system, atoms, seed, a, b) for a, b in bounds]
    return np.concatenate(parts)


def summarize(values: np.ndarray, seed: int, tail: float = 0.0) -> EntropyEstimate:
    n = len(values)
    mean = float(np.mean(values))
    # one sample carries no spread information; report 0 rather than NaN
    stderr = float(np.std(values, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return EntropyEstimate(mean, stderr, n, seed, tail)


def mc_entropy(
    system: NonsingularSystem,
    mu: FiniteSupportMeasure,
    n_samples: int,
    seed: int = 42,
    workers: int = 1,
) -> EntropyEstimate:
    """Monte Carlo mu-entropy: exact sum over atoms, sample mean over states."""
    return summarize(sample_values(system, mu, n_samples, seed, workers), seed, mu.tail)


def entropy_of_bar(
    system: NonsingularSystem,
    mu: FiniteSupportMeasure,
    trunc_n: int,
    n_samples: int = 100_000,
    seed: int = 42,
    exact: bool | None = None,
    workers: int = 1,
) -> EntropyEstimate:
    """Entropy for the truncated geometric average of ``mu`` in place of ``mu``.

    Finite systems are evaluated exactly unless ``exact=False``; the
    estimate's ``tail`` is the truncated mass 2^{-trunc_n-1}.
    """
    bar = geometric_bar(mu, trunc_n)
    if exact is None:
        exact = isinstance(system, FiniteNonsingularSystem)
    if exact:
        if not isinstance(system, FiniteNonsingularSystem):
            raise ValueError("exact evaluation needs a finite system")
        return EntropyEstimate(exact_entropy_finite(system, bar), 0.0, 0, seed, bar.tail)
    return mc_entropy(system, bar, n_samples, seed, workers)


def chain_rule_defect(system: NonsingularSystem, g, h, x) -> float:
    """|log_rn_inv(gh, x) - log_rn_inv(g, hx) - log_rn_inv(h, x)|."""
    gh = system.group.op(g, h)
    lhs = system.log_rn_inv(gh, x)
    rhs = system.log_rn_inv(g, system.apply(h, x)) + system.log_rn_inv(h, x)
    return abs(lhs - rhs)


# ---------------------------------------------------------------- random finite systems

_S3_PERMS = [(0, 1, 2), (1, 0, 2), (0, 2, 1), (2, 1, 0), (1, 2, 0), (2, 0, 1)]


def _s3_table() -> TableGroup:
    index = {p: i for i, p in enumerate(_S3_PERMS)}
    # (a b)(i) = a(b(i))
    rows = [[index[tuple(a[b[i]] for i in range(3))] for b in _S3_PERMS] for a in _S3_PERMS]
    return TableGroup(tuple(tuple(r) for r in rows))


S3 = _s3_table()
_S3_SIGN = [1, -1, -1, -1, 1, 1]


def _random_cyclic_generator(rng: np.random.Generator, n_states: int, order: int) -> np.ndarray:
    divisors = [d for d in range(1, order + 1) if order % d == 0]
    states = rng.permutation(n_states)
    gen = np.arange(n_states)
    pos = 0
    while pos < n_states:
        d = int(rng.choice([d for d in divisors if d <= n_states - pos]))
        block = states[pos : pos + d]
        gen[block] = np.roll(block, -1)
        pos += d
    return gen


def _random_s3_perms(rng: np.random.Generator, n_states: int) -> dict[int, np.ndarray]:
    # split states into orbits: natural action on 3 points, sign action on 2, trivial on 1
    states = rng.permutation(n_states)
    blocks = []
    pos = 0
    while pos < n_states:
        d = int(rng.choice([d for d in (1, 2, 3) if d <= n_states - pos]))
        blocks.append(states[pos : pos + d])
        pos += d
    perms = {}
    for g, sigma in enumerate(_S3_PERMS):
        p = np.arange(n_states)
        for block in blocks:
            if len(block) == 3:
                p[block] = block[list(sigma)]
            elif len(block) == 2 and _S3_SIGN[g] < 0:
                p[block] = block[::-1]
        perms[g] = p
    return perms


def random_finite_system(rng: np.random.Generator, max_states: int = 8) -> FiniteNonsingularSystem:
    """A random action of Z, Z/m (m <= 4) or S3 on at most ``max_states`` states."""
    n = int(rng.integers(2, max_states + 1))
    eta = rng.uniform(0.05, 1.0, size=n)
    eta /= math.fsum(eta)
    kind = int(rng.integers(3))
    if kind == 0:
        return FiniteNonsingularSystem(eta, INTEGER, generator=rng.permutation(n))
    if kind == 1:
        m = int(rng.integers(2, 5))
        return FiniteNonsingularSystem(eta, CyclicGroup(m), generator=_random_cyclic_generator(rng, n, m))
    return FiniteNonsingularSystem(eta, S3, perms=_random_s3_perms(rng, n))


def random_measure(group: Group, rng: np.random.Generator, max_atoms: int = 4) -> FiniteSupportMeasure:
    """A random measure with at most ``max_atoms`` atoms (integers drawn from [-3, 3])."""
    pool: Sequence = group.elements() or list(range(-3, 4))
    k = int(rng.integers(1, min(max_atoms, len(pool)) + 1))
    chosen = rng.choice(len(pool), size=k, replace=False)
    weights = rng.dirichlet(np.ones(k))
    weights /= math.fsum(weights)
    return FiniteSupportMeasure(
        tuple((pool[int(i)], float(w)) for i, w in zip(chosen, weights)), group
    )
