"""The partial semigroup of finite subsets of N under disjoint union, and FU-sets."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Optional, Sequence

from nilrec.parallel import first_index

DEFAULT_DEPTH = 10


class Overlap(ValueError):
    """Raised when a disjoint union is requested for intersecting sets."""


@dataclass(frozen=True, order=True)
class FiniteSet:
    """A finite set of positive integers, stored strictly increasing."""

    elements: tuple[int, ...] = ()

    def __post_init__(self):
        prev = 0
        for x in self.elements:
            if not isinstance(x, int) or isinstance(x, bool):
                raise TypeError("elements must be integers")
            if x <= prev:
                raise ValueError(f"elements must be positive and strictly increasing: {self.elements}")
            prev = x

    @classmethod
    def of(cls, items: Iterable[int]) -> "FiniteSet":
        return cls(tuple(sorted(set(int(x) for x in items))))

    def __iter__(self) -> Iterator[int]:
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, x) -> bool:
        return x in self.as_set()

    def __bool__(self) -> bool:
        return bool(self.elements)

    def as_set(self) -> frozenset[int]:
        return frozenset(self.elements)

    def isdisjoint(self, other: "FiniteSet") -> bool:
        return self.as_set().isdisjoint(other.elements)

    def union(self, other: "FiniteSet") -> "FiniteSet":
        return FiniteSet.of(self.elements + other.elements)

    def difference(self, other: "FiniteSet") -> "FiniteSet":
        drop = other.as_set()
        return FiniteSet(tuple(x for x in self.elements if x not in drop))

    def issubset(self, other: "FiniteSet") -> bool:
        return self.as_set() <= other.as_set()

    def subsets(self) -> list["FiniteSet"]:
        """All 2^|self| subsets in binary-counter order (bit i <-> i-th smallest element)."""
        els = self.elements
        return [FiniteSet(tuple(els[i] for i in range(len(els)) if mask >> i & 1))
                for mask in range(1 << len(els))]

    def __repr__(self) -> str:
        return "{" + ",".join(map(str, self.elements)) + "}"


EMPTY = FiniteSet()


def fset(*xs: int) -> FiniteSet:
    return FiniteSet.of(xs)


def uplus(a: FiniteSet, b: FiniteSet) -> FiniteSet:
    """Disjoint union; undefined (Overlap) when a and b meet."""
    if not a.isdisjoint(b):
        raise Overlap(f"{a} and {b} are not disjoint")
    return a.union(b)


@dataclass(frozen=True)
class FUFamily:
    generators: tuple[FiniteSet, ...]

    def __post_init__(self):
        if not self.generators:
            raise ValueError("an FU family needs at least one generator")
        for g in self.generators:
            if not g:
                raise ValueError("generators must be nonempty")
        for a, b in zip(self.generators, self.generators[1:]):
            if max(a.elements) >= min(b.elements):
                raise ValueError(f"generators not block-ordered: {a} then {b}")

    @classmethod
    def of(cls, gens: Sequence[Iterable[int]]) -> "FUFamily":
        return cls(tuple(FiniteSet.of(g) for g in gens))

    def __len__(self) -> int:
        return len(self.generators)

    def union_at(self, mask: int) -> FiniteSet:
        out: tuple[int, ...] = ()
        i = 0
        while mask:
            if mask & 1:
                out += self.generators[i].elements
            mask >>= 1
            i += 1
        return FiniteSet(out)


def _check_depth(fam: FUFamily, k: int) -> None:
    if not 1 <= k <= len(fam):
        raise ValueError(f"depth {k} outside 1..{len(fam)}")


def fu_enumerate(fam: FUFamily, k: int) -> list[FiniteSet]:
    """All 2^k - 1 nonempty unions of the first k generators.

    Index sets are visited in binary-counter order, so for generators
    (a, b) the order is a, b, a+b.
    """
    _check_depth(fam, k)
    return [fam.union_at(mask) for mask in range(1, 1 << k)]


class _MaskPredicate:
    def __init__(self, pred, fam):
        self.pred = pred
        self.fam = fam

    def __call__(self, mask: int) -> bool:
        return bool(self.pred(self.fam.union_at(mask)))


def meets_fu(pred: Callable[[FiniteSet], bool], fam: FUFamily, k: int,
             jobs: Optional[int] = None) -> Optional[FiniteSet]:
    """First member of fu_enumerate(fam, k) satisfying pred, or None."""
    _check_depth(fam, k)
    mask = first_index(_MaskPredicate(pred, fam), 1, 1 << k, jobs)
    return None if mask is None else fam.union_at(mask)


def random_family(rng: random.Random, length: int, max_block: int = 3, max_gap: int = 3, start: int = 1) -> FUFamily:
    """Block-ordered generators: each block is a random nonempty subset of a short run past the previous one."""
    gens = []
    lo = start
    for _ in range(length):
        lo += rng.randint(0, max_gap)
        span = rng.randint(1, max_block)
        run = list(range(lo, lo + span + rng.randint(0, max_gap)))
        gens.append(FiniteSet.of(rng.sample(run, span)))
        lo = max(gens[-1].elements) + 1
    return FUFamily(tuple(gens))


def to_json(a: FiniteSet) -> list[int]:
    return list(a.elements)


def from_json(items) -> FiniteSet:
    items = [int(x) for x in items]
    if len(set(items)) != len(items):
        raise ValueError(f"duplicate elements in {items}")
    return FiniteSet.of(items)


def family_from_json(gens) -> FUFamily:
    return FUFamily(tuple(from_json(g) for g in gens))
