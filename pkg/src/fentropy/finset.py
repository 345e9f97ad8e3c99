"""The group of finite subsets of {1, 2, 3, ...} and finitely supported measures on countable groups."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import reduce
from pathlib import Path
from typing import Any, Hashable, Iterable, Iterator, Sequence

WEIGHT_TOL = 1e-12
FILE_WEIGHT_TOL = 1e-9


class FinSet:
    """A finite subset of the positive integers; the group law is symmetric difference.

    Stored as a Python int with bit ``n`` set iff ``n`` is a member, which makes
    the group operation a single XOR and keeps the value hashable and unbounded.
    """

    __slots__ = ("mask",)

    def __init__(self, elements: Iterable[int] = ()):
        mask = 0
        for n in elements:
            n = int(n)
            if n < 1:
                raise ValueError(f"FinSet elements must be >= 1, got {n}")
            mask |= 1 << n
        self.mask = mask

    @classmethod
    def from_mask(cls, mask: int) -> FinSet:
        if mask < 0 or mask & 1:
            raise ValueError("mask must be nonnegative with bit 0 clear")
        obj = cls.__new__(cls)
        obj.mask = mask
        return obj

    @property
    def elements(self) -> tuple[int, ...]:
        return tuple(self)

    @property
    def max(self) -> int:
        """Largest element; 0 for the empty set."""
        return self.mask.bit_length() - 1 if self.mask else 0

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __iter__(self) -> Iterator[int]:
        m = self.mask
        while m:
            low = m & -m
            yield low.bit_length() - 1
            m ^= low

    def __contains__(self, n: object) -> bool:
        return isinstance(n, int) and n >= 1 and bool((self.mask >> n) & 1)

    def __xor__(self, other: FinSet) -> FinSet:
        return FinSet.from_mask(self.mask ^ other.mask)

    __add__ = __xor__

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FinSet) and other.mask == self.mask

    def __lt__(self, other: FinSet) -> bool:
        return self.mask < other.mask

    def __hash__(self) -> int:
        return hash(("FinSet", self.mask))

    def __bool__(self) -> bool:
        return self.mask != 0

    def __repr__(self) -> str:
        return f"FinSet({set(self) or '{}'})"


EMPTY = FinSet()


def symdiff(s: FinSet, t: FinSet) -> FinSet:
    return s ^ t


def size_and_max(t: FinSet) -> tuple[int, int]:
    return len(t), t.max


# ---------------------------------------------------------------- groups


class Group:
    """A countable group given by its multiplication, identity and inverse."""

    tag: str = ""

    @property
    def identity(self) -> Hashable:
        raise NotImplementedError

    def op(self, a, b):
        raise NotImplementedError

    def inverse(self, a):
        raise NotImplementedError

    def coerce(self, g):
        """Validate and normalize a raw element."""
        return g

    def elements(self) -> list | None:
        """All elements for finite groups, ``None`` otherwise."""
        return None

    def sort_key(self, g):
        return g


@dataclass(frozen=True)
class FinsetGroup(Group):
    tag: str = field(default="finset", init=False)

    @property
    def identity(self) -> FinSet:
        return EMPTY

    def op(self, a: FinSet, b: FinSet) -> FinSet:
        return a ^ b

    def inverse(self, a: FinSet) -> FinSet:
        return a

    def coerce(self, g) -> FinSet:
        if isinstance(g, FinSet):
            return g
        return FinSet(g)

    def sort_key(self, g: FinSet):
        return g.mask


@dataclass(frozen=True)
class IntegerGroup(Group):
    tag: str = field(default="integer", init=False)

    @property
    def identity(self) -> int:
        return 0

    def op(self, a: int, b: int) -> int:
        return a + b

    def inverse(self, a: int) -> int:
        return -a

    def coerce(self, g) -> int:
        if isinstance(g, bool) or int(g) != g:
            raise ValueError(f"not an integer: {g!r}")
        return int(g)


@dataclass(frozen=True)
class CyclicGroup(Group):
    n: int = 2
    tag: str = field(default="cyclic", init=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("cyclic group order must be >= 1")

    @property
    def identity(self) -> int:
        return 0

    def op(self, a: int, b: int) -> int:
        return (a + b) % self.n

    def inverse(self, a: int) -> int:
        return (-a) % self.n

    def coerce(self, g) -> int:
        if isinstance(g, bool) or int(g) != g:
            raise ValueError(f"not an integer: {g!r}")
        return int(g) % self.n

    def elements(self) -> list[int]:
        return list(range(self.n))


@dataclass(frozen=True)
class TableGroup(Group):
    """A finite group on {0, ..., m-1} given by its Cayley table ``table[a][b] = ab``."""

    table: tuple[tuple[int, ...], ...] = ((0,),)
    tag: str = field(default="table", init=False)

    def __post_init__(self):
        m = len(self.table)
        rows = tuple(tuple(int(v) for v in row) for row in self.table)
        object.__setattr__(self, "table", rows)
        if any(len(r) != m or sorted(r) != list(range(m)) for r in rows):
            raise ValueError("Cayley table rows must be permutations of 0..m-1")
        if any(sorted(rows[a][b] for a in range(m)) != list(range(m)) for b in range(m)):
            raise ValueError("Cayley table columns must be permutations of 0..m-1")
        e = self.identity
        if any(rows[e][a] != a or rows[a][e] != a for a in range(m)):
            raise ValueError("element 0 must be the identity")
        for a in range(m):
            for b in range(m):
                for c in range(m):
                    if rows[rows[a][b]][c] != rows[a][rows[b][c]]:
                        raise ValueError("Cayley table is not associative")

    @property
    def identity(self) -> int:
        return 0

    def op(self, a: int, b: int) -> int:
        return self.table[a][b]

    def inverse(self, a: int) -> int:
        return self.table[a].index(0)

    def coerce(self, g) -> int:
        g = int(g)
        if not 0 <= g < len(self.table):
            raise ValueError(f"element {g} outside table group of order {len(self.table)}")
        return g

    def elements(self) -> list[int]:
        return list(range(len(self.table)))


FINSET = FinsetGroup()
INTEGER = IntegerGroup()


# ---------------------------------------------------------------- measures


@dataclass(frozen=True)
class FiniteSupportMeasure:
    """A probability measure with finite support on a countable group.

    ``atoms`` is a tuple of ``(element, weight)`` pairs with distinct elements.
    ``tail`` records probability mass dropped by a truncation before
    renormalizing (zero unless produced by :func:`geometric_bar`).
    """

    atoms: tuple[tuple[Any, float], ...]
    group: Group
    tail: float = 0.0

    def __post_init__(self):
        atoms = tuple((self.group.coerce(g), float(w)) for g, w in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        if not atoms:
            raise ValueError("a measure needs at least one atom")
        if len({g for g, _ in atoms}) != len(atoms):
            raise ValueError("atoms must have pairwise distinct group elements")
        if any(not math.isfinite(w) or w < 0 for _, w in atoms):
            raise ValueError("weights must be finite and nonnegative")
        total = math.fsum(w for _, w in atoms)
        if abs(total - 1.0) > WEIGHT_TOL:
            raise ValueError(f"weights sum to {total!r}, not 1")

    @property
    def support(self) -> list:
        return [g for g, w in self.atoms if w > 0]

    def weight(self, g) -> float:
        g = self.group.coerce(g)
        for h, w in self.atoms:
            if h == g:
                return w
        return 0.0

    def __iter__(self):
        return iter(self.atoms)

    def __len__(self) -> int:
        return len(self.atoms)


def _merge(pairs: Iterable[tuple[Any, float]], group: Group) -> tuple[tuple[Any, float], ...]:
    acc: dict = {}
    for g, w in pairs:
        acc[g] = acc.get(g, 0.0) + w
    return tuple(sorted(acc.items(), key=lambda kv: group.sort_key(kv[0])))


def measure(atoms: Iterable[tuple[Any, float]], group: Group) -> FiniteSupportMeasure:
    """Build a measure, merging repeated elements."""
    return FiniteSupportMeasure(_merge(((group.coerce(g), w) for g, w in atoms), group), group)


def delta(g, group: Group) -> FiniteSupportMeasure:
    return FiniteSupportMeasure(((g, 1.0),), group)


def uniform(elements: Sequence, group: Group) -> FiniteSupportMeasure:
    w = 1.0 / len(elements)
    return measure(((g, w) for g in elements), group)


def convolve(mu: FiniteSupportMeasure, nu: FiniteSupportMeasure) -> FiniteSupportMeasure:
    """Law of ``g h`` with ``g ~ mu`` and ``h ~ nu`` independent."""
    if mu.group != nu.group:
        raise ValueError(f"group mismatch: {mu.group!r} vs {nu.group!r}")
    group = mu.group
    pairs = ((group.op(g, h), w * v) for g, w in mu.atoms for h, v in nu.atoms)
    atoms = _merge(pairs, group)
    total = math.fsum(w for _, w in atoms)
    return FiniteSupportMeasure(tuple((g, w / total) for g, w in atoms), group)


def convolution_power(mu: FiniteSupportMeasure, n: int) -> FiniteSupportMeasure:
    if n < 0:
        raise ValueError("power must be >= 0")
    return reduce(convolve, [mu] * n, delta(mu.group.identity, mu.group))


def geometric_bar(mu: FiniteSupportMeasure, n_max: int) -> FiniteSupportMeasure:
    """Truncated geometric average ``sum_{n<=N} 2^{-n-1} mu^n``, renormalized.

    The discarded mass ``2^{-N-1}`` is stored in the result's ``tail``.
    """
    if n_max < 0:
        raise ValueError("truncation level must be >= 0")
    group = mu.group
    power = delta(group.identity, group)
    pairs: list[tuple[Any, float]] = []
    for n in range(n_max + 1):
        if n:
            power = convolve(power, mu)
        c = 2.0 ** (-n - 1)
        pairs.extend((g, c * w) for g, w in power.atoms)
    atoms = _merge(pairs, group)
    total = math.fsum(w for _, w in atoms)
    return FiniteSupportMeasure(
        tuple((g, w / total) for g, w in atoms), group, tail=2.0 ** (-n_max - 1)
    )


def check_generating(
    mu: FiniteSupportMeasure, radius: int, target: Iterable | None = None
) -> bool:
    """Bounded search for the semigroup generated by the support of ``mu``.

    Products of at most ``radius`` support elements are enumerated. The
    answer is true when they cover the target: the whole group for finite
    groups; for the integers, elements of both signs with the support's gcd
    equal to 1; for finite sets, the caller's ``target``. ``False`` only
    means nothing was detected within the radius.
    """
    if radius < 1:
        raise ValueError("radius must be >= 1")
    group = mu.group
    support = mu.support
    reached = set(support)
    frontier = set(support)
    for _ in range(radius - 1):
        frontier = {group.op(a, s) for a in frontier for s in support} - reached
        if not frontier:
            break
        reached |= frontier

    if target is not None:
        return {group.coerce(t) for t in target} <= reached
    if group.elements() is not None:
        return reached >= set(group.elements())
    if isinstance(group, IntegerGroup):
        both_signs = any(g > 0 for g in reached) and any(g < 0 for g in reached)
        return both_signs and math.gcd(*support) == 1
    raise ValueError(f"{group.tag} group needs an explicit finite target")


def expected_size_and_max(mu: FiniteSupportMeasure) -> tuple[float, float]:
    if not isinstance(mu.group, FinsetGroup):
        raise ValueError("expected size/max needs a measure on finite sets")
    size = math.fsum(w * len(t) for t, w in mu.atoms)
    top = math.fsum(w * t.max for t, w in mu.atoms)
    return size, top


# ---------------------------------------------------------------- file format


class MeasureFormatError(ValueError):
    pass


def measure_from_dict(doc: dict) -> FiniteSupportMeasure:
    try:
        tag = doc["group"]
        raw = doc["atoms"]
        if tag == "finset":
            group: Group = FINSET
        elif tag == "integer":
            group = INTEGER
        elif tag == "cyclic":
            group = CyclicGroup(int(doc["n"]))
        else:
            raise MeasureFormatError(f"unknown group {tag!r}")
        pairs = []
        for atom in raw:
            g, w = atom["g"], float(atom["w"])
            if tag == "finset":
                if not isinstance(g, list) or g != sorted(set(g)):
                    raise MeasureFormatError(f"finset element must be a sorted int list: {g!r}")
                g = FinSet(g)
            elif not isinstance(g, int) or isinstance(g, bool):
                raise MeasureFormatError(f"{tag} element must be an int: {g!r}")
            pairs.append((g, w))
    except (KeyError, TypeError) as exc:
        raise MeasureFormatError(f"malformed measure document: {exc}") from exc
    except MeasureFormatError:
        raise
    except ValueError as exc:
        raise MeasureFormatError(str(exc)) from exc

    if not pairs:
        raise MeasureFormatError("measure has no atoms")
    elems = [group.coerce(g) for g, _ in pairs]
    if len(set(elems)) != len(elems):
        raise MeasureFormatError("duplicate atoms")
    if any(w < 0 or not math.isfinite(w) for _, w in pairs):
        raise MeasureFormatError("weights must be finite and nonnegative")
    total = math.fsum(w for _, w in pairs)
    if abs(total - 1.0) > FILE_WEIGHT_TOL:
        raise MeasureFormatError(f"weights sum to {total!r}, not 1 +- {FILE_WEIGHT_TOL}")
    return measure(((g, w / total) for g, w in pairs), group)


def measure_to_dict(mu: FiniteSupportMeasure) -> dict:
    group = mu.group
    if isinstance(group, FinsetGroup):
        atoms = [{"g": list(t), "w": w} for t, w in mu.atoms]
        return {"group": "finset", "atoms": atoms}
    if isinstance(group, IntegerGroup):
        return {"group": "integer", "atoms": [{"g": g, "w": w} for g, w in mu.atoms]}
    if isinstance(group, CyclicGroup):
        return {"group": "cyclic", "n": group.n, "atoms": [{"g": g, "w": w} for g, w in mu.atoms]}
    raise MeasureFormatError(f"no file format for {group.tag} groups")


def load_measure(path: str | Path) -> FiniteSupportMeasure:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MeasureFormatError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise MeasureFormatError(f"{path}: top level must be an object")
    return measure_from_dict(doc)


def save_measure(mu: FiniteSupportMeasure, path: str | Path) -> None:
    Path(path).write_text(json.dumps(measure_to_dict(mu), indent=2) + "\n", encoding="utf-8")
