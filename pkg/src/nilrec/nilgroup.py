"""Exact arithmetic in UT(n, Z), the group of upper unitriangular integer matrices.

UT(n, Z) is nilpotent of class q = n - 1.  Its lower central series is
G_l = {g : superdiagonals 1..l-1 of g vanish}, so the level of an element and
the quotient map G_l -> G_l/G_{l+1} ~ Z^(n-l) are read directly off the
superdiagonals.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Protocol, Sequence

MIN_DIM = 2
MAX_DIM = 8


class DimensionMismatch(ValueError):
    pass


class LevelError(ValueError):
    pass


class GroupLike(Protocol):
    """What the polynomial calculus needs from a group element."""

    def __mul__(self, other): ...

    def inverse(self): ...

    def level(self) -> int: ...

    def is_identity(self) -> bool: ...


@dataclass(frozen=True)
class GroupElement:
    """An n x n upper unitriangular integer matrix.

    Entries are stored row-major as a tuple of tuples of Python ints, so
    arithmetic is exact for arbitrarily large values.
    """

    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = len(self.entries)
        if not MIN_DIM <= n <= MAX_DIM:
            raise ValueError(f"dimension {n} outside {MIN_DIM}..{MAX_DIM}")
        for i, row in enumerate(self.entries):
            if len(row) != n:
                raise ValueError("matrix is not square")
            for j, x in enumerate(row):
                if not isinstance(x, int) or isinstance(x, bool):
                    raise TypeError("entries must be integers")
                if i == j and x != 1:
                    raise ValueError("diagonal entries must be 1")
                if i > j and x != 0:
                    raise ValueError("entries below the diagonal must be 0")

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def q(self) -> int:
        """Nilpotency class of the ambient UT(n, Z)."""
        return self.n - 1

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return multiply(self, other)

    def inverse(self) -> "GroupElement":
        return inverse(self)

    def level(self) -> int:
        return lcs_level(self)

    def is_identity(self) -> bool:
        n = self.n
        return all(self.entries[i][j] == 0 for i in range(n) for j in range(i + 1, n))

    def superdiagonal(self, k: int) -> tuple[int, ...]:
        return tuple(self.entries[i][i + k] for i in range(self.n - k))

    def __repr__(self) -> str:
        terms = []
        n = self.n
        for k in range(1, n):
            for i in range(n - k):
                a = self.entries[i][i + k]
                if a:
                    terms.append(f"{a}*E{i + 1}{i + k + 1}")
        return f"UT{n}(I" + "".join(" + " + t for t in terms) + ")"


def _build(rows: Sequence[Sequence[int]]) -> GroupElement:
    return GroupElement(tuple(tuple(int(x) for x in r) for r in rows))


def identity(n: int) -> GroupElement:
    return _build([[1 if i == j else 0 for j in range(n)] for i in range(n)])


def elementary(n: int, i: int, j: int, a: int = 1) -> GroupElement:
    """I + a*E_ij with 1-based indices, i < j."""
    if not 1 <= i < j <= n:
        raise ValueError(f"E{i}{j} is not strictly upper triangular in dimension {n}")
    rows = [[1 if r == c else 0 for c in range(n)] for r in range(n)]
    rows[i - 1][j - 1] = a
    return _build(rows)


def from_upper(n: int, values: dict[tuple[int, int], int]) -> GroupElement:
    """Build I + sum a_ij E_ij from a {(i, j): a} table (1-based)."""
    rows = [[1 if r == c else 0 for c in range(n)] for r in range(n)]
    for (i, j), a in values.items():
        if not 1 <= i < j <= n:
            raise ValueError(f"E{i}{j} is not strictly upper triangular")
        rows[i - 1][j - 1] = a
    return _build(rows)


def _check_dims(a: GroupElement, b: GroupElement) -> None:
    if a.n != b.n:
        raise DimensionMismatch(f"UT({a.n}) vs UT({b.n})")


def multiply(a: GroupElement, b: GroupElement) -> GroupElement:
    _check_dims(a, b)
    n = a.n
    A, B = a.entries, b.entries
    rows = []
    for i in range(n):
        Ai = A[i]
        row = [0] * n
        row[i] = 1
        for j in range(i + 1, n):
            s = 0
            for k in range(i, j + 1):
                s += Ai[k] * B[k][j]
            row[j] = s
        rows.append(tuple(row))
    return GroupElement(tuple(rows))


def inverse(a: GroupElement) -> GroupElement:
    n = a.n
    A = a.entries
    rows = []
    for i in range(n):
        row = [0] * n
        row[i] = 1
        for j in range(i + 1, n):
            row[j] = -sum(row[k] * A[k][j] for k in range(i, j))
        rows.append(tuple(row))
    return GroupElement(tuple(rows))


def commutator(a: GroupElement, b: GroupElement) -> GroupElement:
    """[a, b] = a^-1 b^-1 a b."""
    _check_dims(a, b)
    return multiply(multiply(inverse(a), inverse(b)), multiply(a, b))


def conjugate_by(a: GroupElement, g: GroupElement) -> GroupElement:
    """g^-1 a g."""
    return multiply(multiply(inverse(g), a), g)


def product(elements: Iterable[GroupElement], n: int) -> GroupElement:
    acc = identity(n)
    for e in elements:
        acc = multiply(acc, e)
    return acc


def power(a: GroupElement, k: int) -> GroupElement:
    base = a if k >= 0 else inverse(a)
    k = abs(k)
    acc = identity(a.n)
    while k:
        if k & 1:
            acc = multiply(acc, base)
        base = multiply(base, base)
        k >>= 1
    return acc


def lcs_level(g: GroupElement) -> int:
    """Smallest l with g in G_l; the identity sits at level q + 1 = n."""
    n = g.n
    for k in range(1, n):
        if any(g.entries[i][i + k] for i in range(n - k)):
            return k
    return n


def principal_projection(g: GroupElement, l: int) -> tuple[int, ...]:
    """Image of g under G_l -> G_l/G_{l+1} ~ Z^(n-l)."""
    if not 1 <= l <= g.q:
        raise LevelError(f"level {l} outside 1..{g.q}")
    if lcs_level(g) < l:
        raise LevelError(f"element has level {lcs_level(g)} < {l}")
    return g.superdiagonal(l)


def lift(n: int, l: int, vector: Sequence[int]) -> GroupElement:
    """The element of G_l with superdiagonal l equal to `vector` and no other off-diagonal entries."""
    if len(vector) != n - l:
        raise LevelError(f"vector of length {len(vector)} does not fit level {l} of UT({n})")
    return from_upper(n, {(i + 1, i + 1 + l): int(v) for i, v in enumerate(vector) if v})


def elementary_factors(g: GroupElement) -> list[tuple[int, int, int]]:
    """Write g = prod (I + a E_ij) over the returned (i, j, a), 1-based, in order.

    Entries are cleared superdiagonal by superdiagonal; left-multiplying by
    (I - a E_ij) only disturbs entries further from the diagonal.
    """
    n = g.n
    h = [list(r) for r in g.entries]
    factors = []
    for k in range(1, n):
        for i in range(n - k):
            j = i + k
            a = h[i][j]
            if not a:
                continue
            row_j = h[j]
            h[i] = [x - a * y for x, y in zip(h[i], row_j)]
            factors.append((i + 1, j + 1, a))
    return factors


def random_element(rng: random.Random, n: int, bound: int = 10, min_level: int = 1) -> GroupElement:
    """Uniform entries in [-bound, bound] on superdiagonals >= min_level."""
    rows = [[1 if r == c else 0 for c in range(n)] for r in range(n)]
    for k in range(min_level, n):
        for i in range(n - k):
            rows[i][i + k] = rng.randint(-bound, bound)
    return _build(rows)


def random_element_at_level(rng: random.Random, n: int, level: int, bound: int = 5) -> GroupElement:
    """A random element lying in G_level but not in G_{level+1}."""
    if level >= n:
        return identity(n)
    while True:
        g = random_element(rng, n, bound, min_level=level)
        if lcs_level(g) == level:
            return g


def to_json(g: GroupElement) -> list[list[str]]:
    return [[str(x) for x in row] for row in g.entries]


def from_json(rows) -> GroupElement:
    return _build([[int(x) for x in row] for row in rows])
