"""Weights, principal parts and weight vectors of polynomial mappings.

A nontrivial mapping P has weight (l, d) where l is the smallest level met by
its values (so P maps into G_l) and d is the degree of the abelian mapping
phi_l o P : F(S) -> G_l/G_{l+1} ~ Z^(n-l).  The degree is read from the
Moebius coefficients c(t) = sum over s in t of (-1)^|t-s| phi_l(P(s)); the
top-degree coefficients form the principal part.  Because a mapping only
depends on the finite set of coordinates in its tables, all of this is
computed exactly from the values on that set.

Weights are ordered level first: (l, d) < (l', d') iff l > l', or l == l' and
d < d'.  The trivial mapping has weight (q + 1, 0), below every other weight,
and is not counted in weight vectors.
"""

from __future__ import annotations

import functools
import random
from dataclasses import dataclass, field
from typing import Optional

from nilrec import nilgroup, polymap
from nilrec.nilgroup import GroupElement
from nilrec.polymap import PolynomialMapping, System, TriangularMonomialMap
from nilrec.semigroup import FiniteSet


@functools.total_ordering
@dataclass(frozen=True)
class Weight:
    level: int
    degree: int

    def _key(self):
        return (-self.level, self.degree)

    def __lt__(self, other: "Weight") -> bool:
        return self._key() < other._key()

    def as_list(self) -> list[int]:
        return [self.level, self.degree]

    def __repr__(self) -> str:
        return f"({self.level},{self.degree})"


@dataclass(frozen=True)
class PrincipalPart:
    degree: int
    table: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]

    def as_dict(self) -> dict:
        return dict(self.table)


@dataclass(frozen=True)
class Analysis:
    weight: Weight
    principal: PrincipalPart
    ground: FiniteSet


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _values(P: PolynomialMapping, ground: FiniteSet) -> list[GroupElement]:
    return [polymap.evaluate(P, a) for a in ground.subsets()]


def _analyse_table(values: list[GroupElement], ground: FiniteSet, n: int) -> Analysis:
    level = min(v.level() for v in values)
    if level == n:
        return Analysis(Weight(n, 0), PrincipalPart(0, ()), ground)
    coeffs = [list(v.superdiagonal(level)) for v in values]
    m = len(ground)
    for i in range(m):
        bit = 1 << i
        for mask in range(1 << m):
            if mask & bit:
                hi, lo = coeffs[mask], coeffs[mask ^ bit]
                coeffs[mask] = [x - y for x, y in zip(hi, lo)]
    nonzero = [mask for mask, c in enumerate(coeffs) if any(c)]
    degree = max(_popcount(mask) for mask in nonzero)
    els = ground.elements
    table = sorted(
        (tuple(els[i] for i in range(m) if mask >> i & 1), tuple(coeffs[mask]))
        for mask in nonzero if _popcount(mask) == degree
    )
    return Analysis(Weight(level, degree), PrincipalPart(degree, tuple(table)), ground)


def analyse(P: PolynomialMapping) -> Analysis:
    ground = P.ground()
    return _analyse_table(_values(P, ground), ground, P.n)


def weight_of(P: PolynomialMapping) -> Weight:
    return analyse(P).weight


def is_trivial(P: PolynomialMapping) -> bool:
    return weight_of(P).level == P.n


def principal_part(P: PolynomialMapping) -> PrincipalPart:
    a = analyse(P)
    if a.weight.degree == 0:
        raise ValueError(f"mapping of weight {a.weight} has degree 0 and no principal part")
    return a.principal


def signature(P: PolynomialMapping) -> tuple[Weight, PrincipalPart]:
    """Equivalence-class key: weight plus principal part (degree 0 included)."""
    a = analyse(P)
    return a.weight, a.principal


def equivalent(P: PolynomialMapping, Q: PolynomialMapping) -> bool:
    return signature(P) == signature(Q)


def canonicalize(P: PolynomialMapping) -> PolynomialMapping:
    """Rewrite P as a product of triangular monomials of strictly decreasing weight.

    Repeatedly split off the triangular monomial whose values are the
    canonical lifts (see `nilgroup.lift`) of the top Moebius coefficients; the
    remaining quotient has strictly smaller weight.  The result agrees with P
    at every point of its domain and its first factor carries w(P).
    """
    ground = P.ground()
    n = P.n
    m = len(ground)
    els = ground.elements
    values = _values(P, ground)
    factors = []
    while True:
        a = _analyse_table(values, ground, n)
        if a.weight.level == n:
            break
        l, d = a.weight.level, a.weight.degree
        entries = tuple((key, nilgroup.lift(n, l, vec)) for key, vec in a.principal.table)
        factor = TriangularMonomialMap(n, d, entries)
        factors.append(factor)
        for mask in range(1 << m):
            live = frozenset(els[i] for i in range(m) if mask >> i & 1)
            values[mask] = factor.evaluate(live).inverse() * values[mask]
    return PolynomialMapping(n, tuple(factors), P.exclusion)


@dataclass(frozen=True)
class WeightVector:
    """Finitely supported count of equivalence classes per weight."""

    counts: tuple[tuple[Weight, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "counts",
                           tuple(sorted(((w, c) for w, c in self.counts if c), key=lambda p: p[0], reverse=True)))

    @classmethod
    def from_dict(cls, d: dict) -> "WeightVector":
        return cls(tuple(d.items()))

    def as_dict(self) -> dict[Weight, int]:
        return dict(self.counts)

    def __lt__(self, other):
        return compare(self, other) < 0

    def __le__(self, other):
        return compare(self, other) <= 0

    def __gt__(self, other):
        return compare(self, other) > 0

    def __ge__(self, other):
        return compare(self, other) >= 0

    def to_json(self) -> list:
        return [[w.level, w.degree, c] for w, c in self.counts]


def weight_vector(A: System | list[PolynomialMapping]) -> WeightVector:
    classes: dict = {}
    for P in A:
        w, pp = signature(P)
        if w.level == P.n:
            continue
        classes.setdefault((w, pp), w)
    counts: dict[Weight, int] = {}
    for w in classes.values():
        counts[w] = counts.get(w, 0) + 1
    return WeightVector.from_dict(counts)


def compare(v1: WeightVector, v2: WeightVector) -> int:
    """-1, 0 or 1; decided by the largest weight at which the counts differ."""
    a, b = v1.as_dict(), v2.as_dict()
    for w in sorted(set(a) | set(b), reverse=True):
        x, y = a.get(w, 0), b.get(w, 0)
        if x != y:
            return -1 if x < y else 1
    return 0


# -- the five reduction facts ----------------------------------------------

@dataclass
class ItemResult:
    item: int
    applicable: bool
    passed: bool
    weights_before: list = field(default_factory=list)
    weights_after: list = field(default_factory=list)
    note: str = ""

    def to_json(self) -> dict:
        return {
            "item": self.item,
            "applicable": self.applicable,
            "passed": self.passed,
            "weights_before": self.weights_before,
            "weights_after": self.weights_after,
            "note": self.note,
        }


def _shift_quotient(P: PolynomialMapping, gamma: FiniteSet) -> PolynomialMapping:
    """P^-1 U_gamma P on F(S minus gamma)."""
    return polymap.quotient_left(polymap.restrict(P, gamma), polymap.shift(P, gamma))


def _lighter_partners(P: PolynomialMapping, g: GroupElement) -> list[PolynomialMapping]:
    """Mappings of weight below w(P): the commutator [P, g] and the tail of P's canonical form."""
    tail = canonicalize(P)
    tail = PolynomialMapping(P.n, tail.factors[1:], P.exclusion)
    return [polymap.commutator_map(P, g), tail]


def _item1(polys, gamma):
    before, after = [], []
    ok = True
    for P in polys:
        if is_trivial(P):
            continue
        w = weight_of(P)
        w2 = weight_of(_shift_quotient(P, gamma))
        before.append(w.as_list())
        after.append(w2.as_list())
        ok &= w2 < w
    if not before:
        return ItemResult(1, False, True, note="no nontrivial mapping")
    return ItemResult(1, True, ok, before, after)


def _item2(polys, gamma, g):
    derived = []
    dropped = 0
    for P in polys:
        R = polymap.restrict(P, gamma)
        for cand in (R, polymap.conjugate(R, g), polymap.shift(P, gamma)):
            if equivalent(cand, R):
                derived.append(cand)
            else:
                dropped += 1
    wa, wb = weight_vector(polys), weight_vector(derived)
    note = f"{dropped} candidate(s) not equivalent to a restriction, left out" if dropped else ""
    return ItemResult(2, True, compare(wb, wa) <= 0, wa.to_json(), wb.to_json(), note)


def _item34(item, polys, g):
    derived = []
    bad = 0
    for P in polys:
        if is_trivial(P):
            derived.append(P)
            continue
        w = weight_of(P)
        if item == 3:
            derived.append(P)
        for Q in _lighter_partners(P, g):
            if not weight_of(Q) < w:
                bad += 1
                continue
            derived.append(polymap.product(P, Q))
            if item == 4:
                derived.append(polymap.product(Q, P))
    wa, wb = weight_vector(polys), weight_vector(derived)
    ok = bad == 0 and compare(wb, wa) <= 0
    note = f"{bad} partner(s) not lighter than their mapping" if bad else ""
    return ItemResult(item, True, ok, wa.to_json(), wb.to_json(), note)


def _item5(polys):
    if any(is_trivial(P) for P in polys):
        return ItemResult(5, False, True, note="system contains a trivial mapping")
    weights = [weight_of(P) for P in polys]
    Q = polys[weights.index(min(weights))]
    derived = [polymap.quotient_left(Q, P) for P in polys]
    derived += [polymap.quotient_left(P, Q) for P in polys if equivalent(P, Q)]
    wa, wb = weight_vector(polys), weight_vector(derived)
    return ItemResult(5, True, compare(wb, wa) < 0, wa.to_json(), wb.to_json())


def check_weight_reduction(A: System, gamma: FiniteSet, g: GroupElement) -> list[ItemResult]:
    """Build the derived systems of the five reduction facts and test each claimed inequality.

    1. w(P^-1 U_gamma P) < w(P) for every nontrivial P in A.
    2. A restriction-equivalent system on F(S minus gamma) has w(A') <= w(A).
    3. A' = {P, PQ} with w(Q) < w(P): w(A') <= w(A).
    4. A' = {PQ, QP} with w(Q) < w(P): w(A') <= w(A).
    5. Q of minimal weight in A, A' = {Q^-1 P} plus {P^-1 Q : P ~ Q}: w(A') < w(A).
    """
    polys = list(A)
    for P in polys:
        if not gamma.isdisjoint(P.exclusion):
            raise ValueError(f"{gamma} meets the excluded set of a mapping")
    return [_item1(polys, gamma), _item2(polys, gamma, g), _item34(3, polys, g),
            _item34(4, polys, g), _item5(polys)]


def random_reduction_case(rng: random.Random, n: int, ground_size: int = 4, max_polys: int = 3):
    """A random (system, gamma, g) triple with nontrivial members."""
    target = rng.randint(1, max_polys)
    polys = []
    while len(polys) < target:
        P = polymap.random_polynomial(rng, n, ground_size)
        if not is_trivial(P):
            polys.append(P)
    k = rng.randint(1, max(1, ground_size // 2))
    gamma = FiniteSet.of(rng.sample(range(1, ground_size + 1), k))
    g = nilgroup.random_element(rng, n, bound=3)
    return System(tuple(polys)), gamma, g


def reduction_trials(n_values, trials: int, seed: int, ground_size: int = 4,
                     deadline: Optional[float] = None) -> list[dict]:
    """Run `trials` random cases per dimension and aggregate per item.

    Returns one record per item: {item, trials, passes, failures}; a failure
    lists the system, gamma and weights on both sides.
    """
    import time

    records = {i: {"item": i, "trials": 0, "passes": 0, "failures": []} for i in range(1, 6)}
    for n in n_values:
        rng = random.Random(f"{seed}:{n}")
        for t in range(trials):
            if deadline is not None and time.monotonic() > deadline:
                raise TimeoutError(sorted(records.values(), key=lambda r: r["item"]))
            A, gamma, g = random_reduction_case(rng, n, ground_size)
            for res in check_weight_reduction(A, gamma, g):
                if not res.applicable:
                    continue
                rec = records[res.item]
                rec["trials"] += 1
                if res.passed:
                    rec["passes"] += 1
                else:
                    rec["failures"].append({
                        "n": n,
                        "trial": t,
                        "system": polymap.system_to_json(A),
                        "gamma": list(gamma.elements),
                        "weights_before": res.weights_before,
                        "weights_after": res.weights_after,
                    })
    return [records[i] for i in range(1, 6)]
