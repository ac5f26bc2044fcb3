"""Polynomial mappings F(S) -> UT(n, Z) built from monomials and triangular monomials.

A factor is an ordered table of (key, value) entries.  Evaluated at a finite
set alpha it multiplies, in table order, the values of all keys whose
coordinates lie in ``anchor | alpha``.  For a monomial the keys are d-tuples
(repetition allowed), for a triangular monomial they are d-element sets, and
the anchor is the set that `shift` has pinned in place.  Keys off the table
contribute the identity, so the table order is the whole linear order that
matters for evaluation.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional, Sequence, Union

from nilrec import nilgroup
from nilrec.nilgroup import DimensionMismatch, GroupElement
from nilrec.semigroup import EMPTY, FiniteSet, Overlap


class DomainError(ValueError):
    """Evaluation point meets the excluded part of the ground set."""


class NonAbelian(ValueError):
    pass


Key = tuple[int, ...]


def _check_key(key: Key, d: int, triangular: bool) -> None:
    if len(key) != d:
        raise ValueError(f"key {key} does not have length {d}")
    if any((not isinstance(c, int)) or c < 1 for c in key):
        raise ValueError(f"key {key} must have positive integer coordinates")
    if triangular and any(a >= b for a, b in zip(key, key[1:])):
        raise ValueError(f"triangular key {key} must be a strictly increasing set")


@dataclass(frozen=True)
class _Factor:
    n: int
    d: int
    entries: tuple[tuple[Key, GroupElement], ...] = ()
    anchor: FiniteSet = EMPTY

    kind = "factor"

    def __post_init__(self):
        triangular = self.kind == "triangular"
        seen = set()
        kept = []
        for key, value in self.entries:
            key = tuple(key)
            _check_key(key, self.d, triangular)
            if key in seen:
                raise ValueError(f"key {key} appears twice")
            seen.add(key)
            if value.n != self.n:
                raise DimensionMismatch(f"value in UT({value.n}) inside a UT({self.n}) factor")
            if not value.is_identity():
                kept.append((key, value))
        object.__setattr__(self, "entries", tuple(kept))

    @cached_property
    def _compiled(self):
        return [(frozenset(k), v) for k, v in self.entries]

    def evaluate(self, live: frozenset) -> GroupElement:
        acc = nilgroup.identity(self.n)
        for keyset, value in self._compiled:
            if keyset <= live:
                acc = nilgroup.multiply(acc, value)
        return acc

    def coords(self) -> frozenset[int]:
        return frozenset(c for k, _ in self.entries for c in k)

    def level(self) -> int:
        return min((v.level() for _, v in self.entries), default=self.n)

    def is_trivial(self) -> bool:
        return not self.entries

    def _replace(self, entries, anchor=None):
        return type(self)(self.n, self.d, tuple(entries), self.anchor if anchor is None else anchor)

    def inverted(self):
        """The factor evaluating to the inverse: inverse values in reversed order."""
        return self._replace((k, v.inverse()) for k, v in reversed(self.entries))

    def conjugated(self, g: GroupElement):
        ginv = g.inverse()
        return self._replace((k, ginv * v * g) for k, v in self.entries)

    def anchored(self, gamma: FiniteSet):
        return self._replace(self.entries, self.anchor.union(gamma))


@dataclass(frozen=True)
class MonomialMap(_Factor):
    """Degree-d monomial (u, order): alpha -> ordered product of u(s) over s in alpha^d.

    All non-identity values share a single level, which is the level of the
    monomial; an empty table is the identity monomial at level q + 1.
    """

    kind = "monomial"

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("monomial degree must be >= 1")
        super().__post_init__()
        levels = {v.level() for _, v in self.entries}
        if len(levels) > 1:
            raise ValueError(f"monomial values span several levels {sorted(levels)}")


@dataclass(frozen=True)
class TriangularMonomialMap(_Factor):
    """Degree-d triangular monomial (v, order): product of v(t) over d-subsets t of alpha.

    Degree 0 is allowed and stands for a constant factor (its only key is ()).
    """

    kind = "triangular"

    def __post_init__(self):
        if self.d < 0:
            raise ValueError("triangular degree must be >= 0")
        super().__post_init__()


Factor = Union[MonomialMap, TriangularMonomialMap]


@dataclass(frozen=True)
class PolynomialMapping:
    """Ordered product of factors, defined on F(S minus `exclusion`)."""

    n: int
    factors: tuple[Factor, ...] = ()
    exclusion: FiniteSet = EMPTY

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        for f in self.factors:
            if f.n != self.n:
                raise DimensionMismatch(f"factor in UT({f.n}) inside a UT({self.n}) mapping")

    def __call__(self, alpha: FiniteSet) -> GroupElement:
        return evaluate(self, alpha)

    def ground(self) -> FiniteSet:
        """Coordinates that can influence a value; P(a) == P(a & ground) for every a."""
        coords = set()
        for f in self.factors:
            coords |= f.coords()
        return FiniteSet.of(coords).difference(self.exclusion)

    def is_trivial(self) -> bool:
        return all(f.is_trivial() for f in self.factors)


def constant_identity(n: int) -> PolynomialMapping:
    return PolynomialMapping(n)


def monomial(n: int, d: int, entries: Iterable[tuple[Key, GroupElement]]) -> PolynomialMapping:
    return PolynomialMapping(n, (MonomialMap(n, d, tuple(entries)),))


def triangular(n: int, d: int, entries: Iterable[tuple[Key, GroupElement]]) -> PolynomialMapping:
    return PolynomialMapping(n, (TriangularMonomialMap(n, d, tuple(entries)),))


@dataclass(frozen=True)
class System:
    polys: tuple[PolynomialMapping, ...]

    def __post_init__(self):
        object.__setattr__(self, "polys", tuple(self.polys))
        if not self.polys:
            raise ValueError("a system needs at least one mapping")
        dims = {p.n for p in self.polys}
        if len(dims) != 1:
            raise DimensionMismatch(f"system mixes dimensions {sorted(dims)}")

    @property
    def n(self) -> int:
        return self.polys[0].n

    def __iter__(self):
        return iter(self.polys)

    def __len__(self):
        return len(self.polys)


def evaluate(P: PolynomialMapping, alpha: FiniteSet) -> GroupElement:
    if not alpha.isdisjoint(P.exclusion):
        raise DomainError(f"{alpha} meets the excluded set {P.exclusion}")
    live = alpha.as_set()
    acc = nilgroup.identity(P.n)
    for f in P.factors:
        value = f.evaluate(live | f.anchor.as_set() if f.anchor else live)
        acc = nilgroup.multiply(acc, value)
    return acc


def _check_same_n(P: PolynomialMapping, Q: PolynomialMapping) -> None:
    if P.n != Q.n:
        raise DimensionMismatch(f"UT({P.n}) mapping vs UT({Q.n}) mapping")


def restrict(P: PolynomialMapping, gamma: FiniteSet) -> PolynomialMapping:
    """P viewed as a mapping on F(S minus gamma)."""
    return PolynomialMapping(P.n, P.factors, P.exclusion.union(gamma))


def shift(P: PolynomialMapping, gamma: FiniteSet) -> PolynomialMapping:
    """U_gamma P, the mapping alpha -> P(gamma | alpha) on F(S minus gamma).

    Each factor keeps its table and order and pins gamma into its anchor;
    `weight.canonicalize` re-expands the result into lower-degree factors.
    """
    if not gamma:
        raise ValueError("shift needs a nonempty set")
    if not gamma.isdisjoint(P.exclusion):
        raise Overlap(f"{gamma} meets the excluded set {P.exclusion}")
    return PolynomialMapping(P.n, tuple(f.anchored(gamma) for f in P.factors), P.exclusion.union(gamma))


def conjugate(P: PolynomialMapping, g: GroupElement) -> PolynomialMapping:
    """alpha -> g^-1 P(alpha) g."""
    if g.n != P.n:
        raise DimensionMismatch(f"UT({g.n}) element vs UT({P.n}) mapping")
    return PolynomialMapping(P.n, tuple(f.conjugated(g) for f in P.factors), P.exclusion)


def product(P: PolynomialMapping, Q: PolynomialMapping) -> PolynomialMapping:
    """alpha -> P(alpha) Q(alpha)."""
    _check_same_n(P, Q)
    return PolynomialMapping(P.n, P.factors + Q.factors, P.exclusion.union(Q.exclusion))


def inverse(P: PolynomialMapping) -> PolynomialMapping:
    return PolynomialMapping(P.n, tuple(f.inverted() for f in reversed(P.factors)), P.exclusion)


def quotient_left(Q: PolynomialMapping, P: PolynomialMapping) -> PolynomialMapping:
    """alpha -> Q(alpha)^-1 P(alpha)."""
    return product(inverse(Q), P)


def commutator_map(P: PolynomialMapping, g: GroupElement) -> PolynomialMapping:
    """alpha -> [P(alpha), g] = P(alpha)^-1 g^-1 P(alpha) g."""
    return quotient_left(P, conjugate(P, g))


def extensional_equal(P: PolynomialMapping, Q: PolynomialMapping, ground: FiniteSet) -> bool:
    """P(a) == Q(a) for every a inside ground (points of either exclusion are skipped)."""
    _check_same_n(P, Q)
    live = ground.difference(P.exclusion).difference(Q.exclusion)
    return all(evaluate(P, a) == evaluate(Q, a) for a in live.subsets())


def is_abelian(P: PolynomialMapping) -> bool:
    """True when every pair of values appearing in P commutes."""
    if P.n == 2:
        return True
    values = [v for f in P.factors for _, v in f.entries]
    return all(a * b == b * a for a, b in itertools.combinations(values, 2))


def discrete_derivative_abelian(P: PolynomialMapping, beta: FiniteSet) -> PolynomialMapping:
    """D_beta P with P(alpha | beta) = P(alpha) + (D_beta P)(alpha), for abelian P."""
    if not is_abelian(P):
        raise NonAbelian("discrete derivative needs commuting values")
    return quotient_left(restrict(P, beta), shift(P, beta))


# -- random corpus ---------------------------------------------------------

def random_factor(rng: random.Random, n: int, coords: Sequence[int], d: int, level: int,
                  kind: str = "monomial", density: float = 0.5, bound: int = 3) -> Factor:
    if kind == "monomial":
        keys = list(itertools.product(coords, repeat=d))
        cls = MonomialMap
    else:
        keys = list(itertools.combinations(coords, d))
        cls = TriangularMonomialMap
    chosen = [k for k in keys if rng.random() < density] or [rng.choice(keys)]
    rng.shuffle(chosen)
    entries = tuple((k, nilgroup.random_element_at_level(rng, n, level, bound)) for k in chosen)
    return cls(n, d, entries)


def random_polynomial(rng: random.Random, n: int, ground_size: int = 4, max_factors: int = 3,
                      max_degree: int = 2, bound: int = 3) -> PolynomialMapping:
    """A random nontrivial mapping with P(empty) = 1 whose keys lie in {1..ground_size}."""
    coords = list(range(1, ground_size + 1))
    factors = []
    for _ in range(rng.randint(1, max_factors)):
        d = rng.randint(1, max_degree)
        level = rng.randint(1, n - 1)
        kind = rng.choice(("monomial", "triangular"))
        if kind == "triangular" and d > ground_size:
            kind = "monomial"
        factors.append(random_factor(rng, n, coords, d, level, kind, bound=bound))
    return PolynomialMapping(n, tuple(factors))


# -- JSON ------------------------------------------------------------------

def factor_to_json(f: Factor) -> dict:
    out = {
        "degree": f.d,
        "kind": f.kind,
        "support": [{"key": list(k), "value": nilgroup.to_json(v), "rank": r}
                    for r, (k, v) in enumerate(f.entries)],
    }
    if f.anchor:
        out["anchor"] = list(f.anchor.elements)
    return out


def _rule_entries(kind: str, d: int, rule: dict, n: int) -> list[tuple[Key, GroupElement]]:
    """Entries g_s = (scale * prod s) E_ij for every key s over range [lo, hi]."""
    if rule.get("type", "product") != "product":
        raise ValueError(f"unknown rule type {rule.get('type')!r}")
    lo, hi = (int(x) for x in rule["range"])
    scale = int(rule.get("scale", 1))
    i, j = (int(x) for x in rule.get("generator", (1, n)))
    coords = range(lo, hi + 1)
    keys = itertools.product(coords, repeat=d) if kind == "monomial" else itertools.combinations(coords, d)
    out = []
    for key in keys:
        c = scale
        for x in key:
            c *= x
        out.append((key, nilgroup.elementary(n, i, j, c)))
    return out


def factor_from_json(obj: dict, n: Optional[int] = None) -> Factor:
    """Factor object: {degree, kind, support: [{key, value, rank}], anchor?}.

    Instead of `support`, a `rule` {type: "product", scale, range: [lo, hi],
    generator: [i, j]} fills every key over the range with
    (scale * product of coordinates) E_ij; this needs the dimension n.
    """
    kind = obj.get("kind", "monomial")
    cls = {"monomial": MonomialMap, "triangular": TriangularMonomialMap}.get(kind)
    if cls is None:
        raise ValueError(f"unknown factor kind {kind!r}")
    if "rule" in obj:
        if n is None:
            raise ValueError("a rule-based factor needs the dimension 'n'")
        d = int(obj["degree"])
        return cls(n, d, tuple(_rule_entries(kind, d, obj["rule"], n)), FiniteSet.of(obj.get("anchor", [])))
    support = obj.get("support", [])
    ranks = [item.get("rank", i) for i, item in enumerate(support)]
    if len(set(ranks)) != len(ranks):
        raise ValueError("support ranks must be distinct")
    ordered = [item for _, item in sorted(zip(ranks, support), key=lambda p: p[0])]
    entries = tuple((tuple(int(c) for c in item["key"]), nilgroup.from_json(item["value"])) for item in ordered)
    if n is None:
        if not entries:
            raise ValueError("cannot infer the dimension of an empty factor; give 'n'")
        n = entries[0][1].n
    anchor = FiniteSet.of(obj.get("anchor", []))
    return cls(n, int(obj["degree"]), entries, anchor)


def to_json(P: PolynomialMapping) -> dict:
    out = {"n": P.n, "factors": [factor_to_json(f) for f in P.factors]}
    if P.exclusion:
        out["exclusion"] = list(P.exclusion.elements)
    return out


def from_json(obj: dict, n: Optional[int] = None) -> PolynomialMapping:
    """Accepts a mapping object or a bare factor object (one with a 'kind' or 'support' field)."""
    if "factors" not in obj:
        obj = {"factors": [obj], "n": obj.get("n", n)}
    n = obj.get("n") or n
    if n is not None:
        n = int(n)
    factors = tuple(factor_from_json(f, n) for f in obj["factors"])
    if n is None:
        if not factors:
            raise ValueError("cannot infer the dimension of an empty mapping; give 'n'")
        n = factors[0].n
    return PolynomialMapping(n, factors, FiniteSet.of(obj.get("exclusion", [])))


def system_to_json(A: System) -> list[dict]:
    return [to_json(P) for P in A]


def system_from_json(items: list, n: Optional[int] = None) -> System:
    return System(tuple(from_json(obj, n) for obj in items))
