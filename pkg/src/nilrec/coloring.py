"""Finite partition-Ramsey searches: van der Waerden progressions, monochromatic
IP-configurations in a colored group ball, and windowed piecewise-syndeticity."""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Callable, Hashable, Iterable, Iterator, Optional, Sequence

from nilrec import nilgroup, polymap
from nilrec.nilgroup import GroupElement
from nilrec.parallel import first_index
from nilrec.polymap import PolynomialMapping, System
from nilrec.semigroup import FiniteSet, FUFamily, fu_enumerate

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Coloring:
    points: tuple
    colors: tuple[int, ...]

    def __post_init__(self):
        if len(self.points) != len(self.colors):
            raise ValueError("every point needs exactly one color")
        if len(set(self.points)) != len(self.points):
            raise ValueError("points must be distinct")
        if any(c < 0 for c in self.colors):
            raise ValueError("colors are indices 0..r-1")
        object.__setattr__(self, "_lookup", dict(zip(self.points, self.colors)))

    @property
    def r(self) -> int:
        return max(self.colors, default=-1) + 1

    def color(self, p) -> Optional[int]:
        return self._lookup.get(p)

    def __contains__(self, p) -> bool:
        return p in self._lookup

    @classmethod
    def on_interval(cls, colors: Sequence[int], start: int = 1) -> "Coloring":
        """Integers start, start+1, ... colored in order."""
        return cls(tuple(range(start, start + len(colors))), tuple(int(c) for c in colors))

    @classmethod
    def on_integer_ball(cls, colors: Sequence[int], start: int) -> "Coloring":
        """Integers start.. embedded in UT(2, Z) as I + m E12."""
        return cls(tuple(z(start + i) for i in range(len(colors))), tuple(int(c) for c in colors))


def z(m: int) -> GroupElement:
    """The integer m inside UT(2, Z) ~ (Z, +)."""
    return nilgroup.elementary(2, 1, 2, m)


def z_value(g: GroupElement) -> int:
    if g.n != 2:
        raise ValueError("only UT(2, Z) elements are integers")
    return g[0, 1]


# -- van der Waerden ------------------------------------------------------

def _colors_of(c) -> Sequence[int]:
    if isinstance(c, Coloring):
        if c.points != tuple(range(1, len(c.points) + 1)):
            raise ValueError("van der Waerden search needs a coloring of 1..N")
        return c.colors
    return c


def vdw_search(c, k: int) -> Optional[tuple[int, int]]:
    """First monochromatic k-term progression (start, step) in a coloring of 1..N.

    Progressions are ordered by start, then step.
    """
    if k < 3:
        raise ValueError("progression length must be >= 3")
    colors = _colors_of(c)
    N = len(colors)
    for start in range(1, N + 1):
        col = colors[start - 1]
        for step in range(1, (N - start) // (k - 1) + 1):
            if all(colors[start - 1 + i * step] == col for i in range(1, k)):
                return start, step
    return None


def _index_coloring(idx: int, N: int, r: int) -> tuple[int, ...]:
    out = []
    for _ in range(N):
        idx, d = divmod(idx, r)
        out.append(d)
    return tuple(reversed(out))


class _ApFree:
    def __init__(self, N, k, r):
        self.N, self.k, self.r = N, k, r

    def __call__(self, idx: int) -> bool:
        return vdw_search(_index_coloring(idx, self.N, self.r), self.k) is None


def vdw_exhaustive(N: int, k: int, r: int = 2, jobs: Optional[int] = None) -> dict:
    """Check every r-coloring of 1..N for a monochromatic k-AP.

    Colorings are indexed as base-r numerals (first point most significant);
    the reported example is the lowest-index coloring without a progression.
    """
    total = r ** N
    free = _ApFree(N, k, r)
    first = first_index(free, 0, total, jobs, chunk=1024)
    count = sum(1 for idx in range(total) if free(idx))
    return {
        "N": N,
        "k": k,
        "r": r,
        "colorings": total,
        "ap_free": count,
        "all_contain_ap": count == 0,
        "example_ap_free": None if first is None else list(_index_coloring(first, N, r)),
    }


def vdw_free_colorings(N: int, k: int, r: int = 2) -> Iterator[tuple[int, ...]]:
    """AP-free colorings of 1..N by backtracking, only testing progressions that end at the newest point."""
    colors: list[int] = []

    def closes_ap(pos: int) -> bool:
        col = colors[pos - 1]
        for step in range(1, (pos - 1) // (k - 1) + 1):
            if all(colors[pos - 1 - i * step] == col for i in range(1, k)):
                return True
        return False

    def extend():
        if len(colors) == N:
            yield tuple(colors)
            return
        for col in range(r):
            colors.append(col)
            if not closes_ap(len(colors)):
                yield from extend()
            colors.pop()

    yield from extend()


# -- monochromatic IP configurations ---------------------------------------

def _check_abelian(coloring: Coloring, systems: Sequence[PolynomialMapping]) -> None:
    n = systems[0].n
    if n == 2:
        return
    values = [v for P in systems for f in P.factors for _, v in f.entries]
    values += [p for p in coloring.points if isinstance(p, GroupElement)]
    for a, b in itertools.combinations(values, 2):
        if a * b != b * a:
            raise ValueError("configuration search needs an abelian model group")


def group_config_search(coloring: Coloring, ip_systems: Sequence[PolynomialMapping], fam: FUFamily,
                        depth: int) -> Optional[tuple[GroupElement, FiniteSet]]:
    """First (h, alpha), h in coloring order and alpha in FU order, with h*T_alpha^(i) all one color.

    Products leaving the colored ball are skipped and counted in the log.
    """
    if not ip_systems:
        raise ValueError("need at least one IP system")
    for P in ip_systems:
        for f in P.factors:
            if f.d != 1:
                raise ValueError("IP systems must be degree-1 monomials")
    _check_abelian(coloring, ip_systems)
    alphas = fu_enumerate(fam, depth)
    table = [[polymap.evaluate(P, a) for P in ip_systems] for a in alphas]
    escaped = 0
    for h in coloring.points:
        for alpha, values in zip(alphas, table):
            cols = set()
            for T in values:
                c = coloring.color(h * T)
                if c is None:
                    cols = None
                    break
                cols.add(c)
            if cols is None:
                escaped += 1
                continue
            if len(cols) == 1:
                if escaped:
                    log.info("skipped %d (h, alpha) pairs leaving the ball", escaped)
                return h, alpha
    log.info("skipped %d (h, alpha) pairs leaving the ball", escaped)
    return None


# -- windowed piecewise syndeticity ----------------------------------------

def ball(generators: Sequence[GroupElement], radius: int) -> list[tuple[GroupElement, int]]:
    """Elements of word length <= radius in the generators and their inverses, with lengths, BFS order."""
    if not generators:
        raise ValueError("need generators")
    n = generators[0].n
    letters = []
    for g in generators:
        letters += [g, g.inverse()]
    e = nilgroup.identity(n)
    seen = {e: 0}
    frontier = [e]
    for length in range(1, radius + 1):
        nxt = []
        for g in frontier:
            for a in letters:
                h = g * a
                if h not in seen:
                    seen[h] = length
                    nxt.append(h)
        frontier = nxt
    return list(seen.items())


@dataclass(frozen=True)
class Window:
    generators: tuple[GroupElement, ...]
    radius: int

    def __post_init__(self):
        if self.radius < 1:
            raise ValueError("radius must be >= 1")
        object.__setattr__(self, "generators", tuple(self.generators))

    def elements(self) -> list[tuple[GroupElement, int]]:
        return ball(self.generators, self.radius)

    @property
    def band_width(self) -> int:
        return max(1, math.ceil(self.radius / 2))


def integer_window(radius: int) -> Window:
    return Window((z(1),), radius)


def _as_indicator(A) -> Callable[[GroupElement], bool]:
    if callable(A):
        return A
    members = frozenset(A)
    return members.__contains__


def syndetic_band(A, window: Window, s: int) -> Optional[tuple[int, int]]:
    """First word-length band [lo, hi] of width ceil(radius/2) covered by translates of A.

    The band is covered when every g in it has t*g in A for some t of word
    length <= s.  A is a predicate on the group or a collection of elements.
    """
    if s < 1:
        raise ValueError("gap bound must be >= 1")
    inA = _as_indicator(A)
    translates = [t for t, _ in ball(window.generators, s)]
    elems = window.elements()
    covered = {g: any(inA(t * g) for t in translates) for g, _ in elems}
    width = window.band_width
    for lo in range(0, window.radius - width + 2):
        hi = lo + width - 1
        if all(covered[g] for g, length in elems if lo <= length <= hi):
            return lo, hi
    return None


def pw_syndetic_window(A, window: Window, s: int) -> bool:
    return syndetic_band(A, window, s) is not None


def corollary_return_set(A, R: System, fam: FUFamily, depth: int, window: Window,
                         s: int) -> Optional[tuple[FiniteSet, frozenset]]:
    """First beta in FU order whose return set {a in A : p(beta) a in A for all p in R} passes the window test."""
    inA = _as_indicator(A)
    elems = [g for g, _ in window.elements()]
    for beta in fu_enumerate(fam, depth):
        shifts = [polymap.evaluate(p, beta) for p in R]
        ret = frozenset(a for a in elems if inA(a) and all(inA(p * a) for p in shifts))
        if pw_syndetic_window(ret, window, s):
            return beta, ret
    return None
