"""Unipotent affine actions of UT(n, Z) on tori and searches for recurrence witnesses.

Points of T^m carry exact rational coordinates in [0, 1).  An action is given
by the images of the standard generators x_i = I + E_{i,i+1}; the image of an
arbitrary element is assembled from its elementary factorisation, with
I + E_ij (j > i + 1) realised as the commutator [x_i, I + E_{i+1,j}].
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from nilrec import nilgroup, polymap
from nilrec.nilgroup import GroupElement
from nilrec.parallel import first_index
from nilrec.polymap import System
from nilrec.semigroup import EMPTY, FiniteSet, FUFamily, meets_fu

Point = tuple[Fraction, ...]


class ActionError(ValueError):
    pass


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("use exact rationals ('p/q' strings or Fractions), not floats")
    return Fraction(x)


def point(coords: Sequence) -> Point:
    return tuple(as_fraction(c) % 1 for c in coords)


def rho(x: Point, y: Point) -> Fraction:
    """Max-coordinate distance on the torus; always <= 1/2."""
    if len(x) != len(y):
        raise ValueError("points live on tori of different dimension")
    best = Fraction(0)
    for a, b in zip(x, y):
        d = (a - b) % 1
        d = min(d, 1 - d)
        if d > best:
            best = d
    return best


@dataclass(frozen=True)
class AffineMap:
    """x -> A x + v (mod 1) with A an integer matrix."""

    matrix: tuple[tuple[int, ...], ...]
    vector: tuple[Fraction, ...]

    @classmethod
    def of(cls, matrix, vector) -> "AffineMap":
        return cls(tuple(tuple(int(a) for a in row) for row in matrix), point(vector))

    @classmethod
    def identity(cls, m: int) -> "AffineMap":
        return cls(tuple(tuple(int(i == j) for j in range(m)) for i in range(m)), (Fraction(0),) * m)

    @classmethod
    def rotation(cls, angles) -> "AffineMap":
        return cls(cls.identity(len(angles)).matrix, point(angles))

    @property
    def m(self) -> int:
        return len(self.vector)

    def __call__(self, x: Point) -> Point:
        A = self.matrix
        return tuple((sum(a * c for a, c in zip(A[i], x)) + self.vector[i]) % 1 for i in range(self.m))

    def compose(self, other: "AffineMap") -> "AffineMap":
        """self o other."""
        A, B = self.matrix, other.matrix
        m = self.m
        AB = tuple(tuple(sum(A[i][k] * B[k][j] for k in range(m)) for j in range(m)) for i in range(m))
        v = tuple((sum(A[i][k] * other.vector[k] for k in range(m)) + self.vector[i]) % 1 for i in range(m))
        return AffineMap(AB, v)

    def inverse(self) -> "AffineMap":
        inv = _integer_inverse(self.matrix)
        m = self.m
        v = tuple((-sum(inv[i][k] * self.vector[k] for k in range(m))) % 1 for i in range(m))
        return AffineMap(inv, v)

    def power(self, k: int) -> "AffineMap":
        base = self if k >= 0 else self.inverse()
        k = abs(k)
        acc = AffineMap.identity(self.m)
        while k:
            if k & 1:
                acc = acc.compose(base)
            base = base.compose(base)
            k >>= 1
        return acc

    def is_unipotent(self) -> bool:
        m = self.m
        N = [[self.matrix[i][j] - (i == j) for j in range(m)] for i in range(m)]
        P = N
        for _ in range(m - 1):
            P = [[sum(P[i][k] * N[k][j] for k in range(m)) for j in range(m)] for i in range(m)]
        return all(x == 0 for row in P for x in row)

    def commutes_with(self, other: "AffineMap") -> bool:
        return self.compose(other) == other.compose(self)


def _integer_inverse(A) -> tuple[tuple[int, ...], ...]:
    m = len(A)
    aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(m)] for i, row in enumerate(A)]
    for c in range(m):
        piv = next((r for r in range(c, m) if aug[r][c] != 0), None)
        if piv is None:
            raise ActionError("matrix is singular")
        aug[c], aug[piv] = aug[piv], aug[c]
        p = aug[c][c]
        aug[c] = [x / p for x in aug[c]]
        for r in range(m):
            if r != c and aug[r][c] != 0:
                f = aug[r][c]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[c])]
    inv = [row[m:] for row in aug]
    if any(x.denominator != 1 for row in inv for x in row):
        raise ActionError("matrix is not invertible over Z")
    return tuple(tuple(int(x) for x in row) for row in inv)


class UnipotentAffineAction:
    """Left action of UT(n, Z) on T^m fixed by the images of x_1..x_{n-1}."""

    def __init__(self, n: int, generators: Sequence[AffineMap], check_samples: int = 50, seed: int = 0):
        if len(generators) != n - 1:
            raise ActionError(f"UT({n}) has {n - 1} standard generators, got {len(generators)} images")
        ms = {g.m for g in generators}
        if len(ms) != 1:
            raise ActionError("generator images act on tori of different dimension")
        self.n = n
        self.m = ms.pop()
        self.generators = tuple(generators)
        for i, g in enumerate(self.generators):
            if not g.is_unipotent():
                raise ActionError(f"image of x_{i + 1} is not unipotent")
        self._elementary = {}
        if check_samples:
            bad = self.homomorphism_defect(check_samples, seed)
            if bad is not None:
                raise ActionError(f"assignment does not define an action: law fails for {bad}")

    def __reduce__(self):
        return (self.__class__, (self.n, self.generators, 0))

    def elementary_map(self, i: int, j: int) -> AffineMap:
        key = (i, j)
        if key not in self._elementary:
            if j == i + 1:
                f = self.generators[i - 1]
            else:
                a, b = self.elementary_map(i, i + 1), self.elementary_map(i + 1, j)
                f = a.inverse().compose(b.inverse()).compose(a).compose(b)
            self._elementary[key] = f
        return self._elementary[key]

    def map_of(self, g: GroupElement) -> AffineMap:
        if g.n != self.n:
            raise ActionError(f"UT({g.n}) element given to a UT({self.n}) action")
        f = AffineMap.identity(self.m)
        for i, j, a in nilgroup.elementary_factors(g):
            f = f.compose(self.elementary_map(i, j).power(a))
        return f

    def act(self, g: GroupElement, x: Point) -> Point:
        return self.map_of(g)(x)

    def homomorphism_defect(self, samples: int, seed: int = 0):
        """First sampled (g, h, x) with act(gh, x) != act(g, act(h, x)), else None."""
        rng = random.Random(seed)
        for _ in range(samples):
            g = nilgroup.random_element(rng, self.n, 3)
            h = nilgroup.random_element(rng, self.n, 3)
            x = tuple(Fraction(rng.randint(0, 96), 97) for _ in range(self.m))
            if self.act(g * h, x) != self.act(g, self.act(h, x)):
                return (g, h, x)
        return None


def act(action: UnipotentAffineAction, g: GroupElement, x: Point) -> Point:
    return action.act(g, x)


@dataclass(frozen=True)
class RecurrenceQuery:
    system: System
    x: Point
    epsilon: Fraction
    ground_size: int
    max_card: int

    def __post_init__(self):
        object.__setattr__(self, "epsilon", as_fraction(self.epsilon))
        object.__setattr__(self, "x", point(self.x))
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.ground_size < 1 or self.max_card < 1:
            raise ValueError("ground size and maximal cardinality must be positive")
        for P in self.system:
            if not polymap.evaluate(P, EMPTY).is_identity():
                raise ValueError("every mapping must send the empty set to the identity")


def distances(system: System, action: UnipotentAffineAction, alpha: FiniteSet, y: Point) -> list[Fraction]:
    return [rho(action.act(polymap.evaluate(P, alpha), y), y) for P in system]


def _mask_set(mask: int) -> FiniteSet:
    return FiniteSet(tuple(i + 1 for i in range(mask.bit_length()) if mask >> i & 1))


class _Recurs:
    """Picklable predicate: does alpha (as a bitmask over {1..N}) recur for every mapping?"""

    def __init__(self, q: RecurrenceQuery, action: UnipotentAffineAction, y: Optional[Point] = None):
        self.q = q
        self.action = action
        self.y = q.x if y is None else y

    def on_set(self, alpha: FiniteSet) -> bool:
        eps = self.q.epsilon
        return all(d < eps for d in distances(self.q.system, self.action, alpha, self.y))

    def __call__(self, mask: int) -> bool:
        if bin(mask).count("1") > self.q.max_card:
            return False
        return self.on_set(_mask_set(mask))


def recurrence_search(q: RecurrenceQuery, action: UnipotentAffineAction, jobs: Optional[int] = None):
    """First nonempty alpha in {1..N}, |alpha| <= s, in binary-counter order, with every distance < epsilon.

    Returns (alpha, distances) or None.
    """
    mask = first_index(_Recurs(q, action), 1, 1 << q.ground_size, jobs, chunk=4096)
    if mask is None:
        return None
    alpha = _mask_set(mask)
    ds = distances(q.system, action, alpha, q.x)
    if not all(d < q.epsilon for d in ds):
        raise AssertionError("witness failed re-verification")
    return alpha, ds


def commuting_recurrence(maps: Sequence[AffineMap], x: Point, epsilon, n_max: int) -> Optional[int]:
    """Least n in 1..n_max with rho(T_i^n x, x) < epsilon for every map T_i."""
    eps = as_fraction(epsilon)
    x = point(x)
    for a, b in itertools.combinations(maps, 2):
        if not a.commutes_with(b):
            raise ActionError("maps do not commute")
    ys = [x] * len(maps)
    for n in range(1, n_max + 1):
        ys = [T(y) for T, y in zip(maps, ys)]
        if all(rho(y, x) < eps for y in ys):
            return n
    return None


def default_shift_ball(n: int) -> list[GroupElement]:
    """Identity, then all words of length 1 and 2 in the standard generators and their inverses."""
    letters = []
    for i in range(1, n):
        letters += [nilgroup.elementary(n, i, i + 1, 1), nilgroup.elementary(n, i, i + 1, -1)]
    out = [nilgroup.identity(n)]
    seen = set(out)
    for word in itertools.chain(((a,) for a in letters), itertools.product(letters, repeat=2)):
        g = nilgroup.product(word, n)
        if g not in seen:
            seen.add(g)
            out.append(g)
    return out


def ipstar_fragment_check(q: RecurrenceQuery, action: UnipotentAffineAction, families: Sequence[FUFamily],
                          depth: int, shift_ball: Optional[Sequence[GroupElement]] = None,
                          jobs: Optional[int] = None) -> dict:
    """Look for a base-point shift a such that every family's FU-set meets the return set of a.x.

    The return set of y = act(a, x) is {alpha : rho(P(alpha) y, y) < epsilon
    for every P}.  Candidates a are tried in shift-ball order; the report
    names the first a that works with one witness per family.
    """
    if isinstance(families, FUFamily):
        families = [families]
    if shift_ball is None:
        shift_ball = default_shift_ball(q.system.n)
    first_missing = None
    for idx, a in enumerate(shift_ball):
        y = action.act(a, q.x)
        found = []
        missing = []
        for k, fam in enumerate(families):
            w = meets_fu(_SetPredicate(q, action, y), fam, min(depth, len(fam)), jobs)
            if w is None:
                missing.append(k)
            found.append(w)
        if first_missing is None:
            first_missing = missing
        if not missing:
            return {
                "found": True,
                "a": a,
                "a_index": idx,
                "base_point": y,
                "witnesses": found,
                "candidates_tried": idx + 1,
            }
    return {"found": False, "a": None, "missing_families": first_missing, "candidates_tried": len(shift_ball)}


class _SetPredicate:
    def __init__(self, q, action, y):
        self.inner = _Recurs(q, action, y)

    def __call__(self, alpha: FiniteSet) -> bool:
        return self.inner.on_set(alpha)


# -- JSON ------------------------------------------------------------------

def frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)


def point_to_json(x: Point) -> list[str]:
    return [frac_str(c) for c in x]


def affine_from_json(obj) -> AffineMap:
    vector = obj.get("vector", [])
    m = len(vector)
    matrix = obj.get("matrix") or [[int(i == j) for j in range(m)] for i in range(m)]
    return AffineMap.of(matrix, [as_fraction(v) for v in vector])


def action_from_json(n: int, items) -> UnipotentAffineAction:
    return UnipotentAffineAction(n, [affine_from_json(o) for o in items])
