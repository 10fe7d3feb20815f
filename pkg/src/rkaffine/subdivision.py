"""Immediate-snapshot runs and the standard chromatic subdivision.

One round of immediate snapshot among processes ``P`` is an ordered set
partition of ``P``: a process in block ``b`` sees every process in blocks up to
and including ``b``. An ``m``-round run is a sequence of such partitions, and
the full-information state a process ends up in is a vertex of ``Chr^m``.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Iterator, Optional, Sequence

from .complex_core import (
    ChromaticComplex,
    Vertex,
    base_vertex,
    closure,
    standard_simplex,
)

BUDGET_ENV = "RKAFFINE_FACET_BUDGET"
DEFAULT_FACET_BUDGET = 10**6


class BudgetExceeded(RuntimeError):
    pass


def facet_budget() -> int:
    raw = os.environ.get(BUDGET_ENV)
    if raw is None or raw == "":
        return DEFAULT_FACET_BUDGET
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{BUDGET_ENV} must be an integer, got {raw!r}") from None
    if value < 1:
        raise ValueError(f"{BUDGET_ENV} must be positive")
    return value


def check_budget(count: int, what: str) -> None:
    budget = facet_budget()
    if count > budget:
        raise BudgetExceeded(f"{what} needs {count} facets, budget is {budget} (set {BUDGET_ENV})")


@dataclass(frozen=True)
class OrderedPartition:
    blocks: tuple

    def __post_init__(self) -> None:
        blocks = tuple(frozenset(b) for b in self.blocks)
        if not blocks:
            raise ValueError("ordered partition needs at least one block")
        seen: set[int] = set()
        for b in blocks:
            if not b:
                raise ValueError("empty block")
            if seen & b:
                raise ValueError("blocks overlap")
            seen |= b
        object.__setattr__(self, "blocks", blocks)

    @property
    def participants(self) -> frozenset:
        return frozenset().union(*self.blocks)

    def snapshot(self, i: int) -> frozenset:
        """What ``i`` sees: its own block and everything before it."""
        seen: frozenset = frozenset()
        for b in self.blocks:
            seen |= b
            if i in b:
                return seen
        raise KeyError(i)

    def restrict(self, subset: Iterable[int]) -> "OrderedPartition":
        subset = frozenset(subset)
        return OrderedPartition(tuple(b & subset for b in self.blocks if b & subset))

    def key(self) -> tuple:
        return tuple(tuple(sorted(b)) for b in self.blocks)

    def __str__(self) -> str:
        return "".join("{" + ",".join(map(str, sorted(b))) + "}" for b in self.blocks)


@dataclass(frozen=True)
class RunSequence:
    rounds: tuple

    def __post_init__(self) -> None:
        rounds = tuple(r if isinstance(r, OrderedPartition) else OrderedPartition(tuple(r))
                       for r in self.rounds)
        if not rounds:
            raise ValueError("a run has at least one round")
        parts = rounds[0].participants
        if any(r.participants != parts for r in rounds):
            raise ValueError("all rounds must share one participant set")
        object.__setattr__(self, "rounds", rounds)

    @property
    def participants(self) -> frozenset:
        return self.rounds[0].participants

    @property
    def m(self) -> int:
        return len(self.rounds)

    def __add__(self, other: "RunSequence") -> "RunSequence":
        return RunSequence(self.rounds + other.rounds)

    def slice(self, start: int, stop: int) -> "RunSequence":
        return RunSequence(self.rounds[start:stop])

    def restrict(self, subset: Iterable[int]) -> "RunSequence":
        return RunSequence(tuple(r.restrict(subset) for r in self.rounds))

    def permute(self, pi: dict) -> "RunSequence":
        return RunSequence(tuple(OrderedPartition(tuple(frozenset(pi[x] for x in b) for b in r.blocks))
                                 for r in self.rounds))

    def key(self) -> tuple:
        return tuple(r.key() for r in self.rounds)

    def to_json(self) -> list:
        return [[sorted(b) for b in r.blocks] for r in self.rounds]

    @classmethod
    def from_json(cls, data: Sequence) -> "RunSequence":
        return cls(tuple(OrderedPartition(tuple(frozenset(b) for b in r)) for r in data))

    def __str__(self) -> str:
        return " ".join(str(r) for r in self.rounds)


@dataclass(frozen=True)
class ViewSequence:
    owner: int
    views: tuple


def _ordered_partitions(items: tuple) -> Iterator[tuple]:
    if not items:
        yield ()
        return
    for size in range(1, len(items) + 1):
        for first in itertools.combinations(items, size):
            rest = tuple(x for x in items if x not in first)
            for tail in _ordered_partitions(rest):
                yield (frozenset(first),) + tail


@lru_cache(maxsize=None)
def _is_runs(participants: frozenset) -> tuple:
    parts = [OrderedPartition(p) for p in _ordered_partitions(tuple(sorted(participants)))]
    parts.sort(key=OrderedPartition.key)
    return tuple(parts)


def enumerate_is_runs(participants: Iterable[int]) -> list:
    """Every one-round immediate-snapshot outcome, in lexicographic order."""
    participants = frozenset(participants)
    if not participants:
        raise ValueError("participant set must be nonempty")
    return list(_is_runs(participants))


def enumerate_runs(participants: Iterable[int], m: int) -> Iterator[RunSequence]:
    one = enumerate_is_runs(participants)
    for rounds in itertools.product(one, repeat=m):
        yield RunSequence(rounds)


def nonempty_subsets(n: int) -> list:
    ids = range(1, n + 1)
    return [frozenset(c) for size in range(1, n + 1) for c in itertools.combinations(ids, size)]


def fubini(k: int) -> int:
    """Number of ordered set partitions of a k-set."""
    a = [1]
    for size in range(1, k + 1):
        a.append(sum(_binom(size, j) * a[size - j] for j in range(1, size + 1)))
    return a[k]


def _binom(a: int, b: int) -> int:
    from math import comb
    return comb(a, b)


# Vertices are interned so nested labels compare by identity on the fast path.
_INTERN: dict = {}


def make_vertex(color: int, label: Optional[frozenset]) -> Vertex:
    key = (color, label)
    v = _INTERN.get(key)
    if v is None:
        v = Vertex(color, label)
        _INTERN[key] = v
    return v


def vertices_of(run: RunSequence, start: Optional[dict] = None) -> list:
    """Full-information vertices after each round.

    Returns a list of ``m`` dicts ``pid -> Vertex``. ``start`` maps each
    participant to its initial vertex; by default the corner of ``s``.
    """
    cur = dict(start) if start is not None else {i: base_vertex(i) for i in run.participants}
    out = []
    for rnd in run.rounds:
        nxt = {}
        for i in run.participants:
            nxt[i] = make_vertex(i, frozenset(cur[j] for j in rnd.snapshot(i)))
        out.append(nxt)
        cur = nxt
    return out


def run_facet(run: RunSequence, start: Optional[dict] = None) -> frozenset:
    return frozenset(vertices_of(run, start)[-1].values())


def views_of(run: RunSequence, i: int) -> ViewSequence:
    if i not in run.participants:
        raise KeyError(f"process {i} does not participate in {run}")
    views: list[dict] = []
    prev = {j: frozenset((j,)) for j in run.participants}
    for rnd in run.rounds:
        cur = {}
        for j in run.participants:
            acc: frozenset = frozenset()
            for x in rnd.snapshot(j):
                acc |= prev[x]
            cur[j] = acc
        views.append(cur)
        prev = cur
    return ViewSequence(i, tuple(v[i] for v in views))


def all_views(run: RunSequence) -> list:
    """``[round][pid] -> set`` of transitively seen processes."""
    out = []
    prev = {j: frozenset((j,)) for j in run.participants}
    for rnd in run.rounds:
        cur = {}
        for j in run.participants:
            acc: frozenset = frozenset()
            for x in rnd.snapshot(j):
                acc |= prev[x]
            cur[j] = acc
        out.append(cur)
        prev = cur
    return out


def carrier(run: RunSequence, i: int) -> frozenset:
    return views_of(run, i).views[-1]


def chr(c: ChromaticComplex) -> ChromaticComplex:
    """Replace every facet of ``c`` by its chromatic subdivision."""
    facets = []
    for f in c.facets:
        by_color = {v.color: v for v in f}
        for part in enumerate_is_runs(by_color):
            facets.append(frozenset(
                make_vertex(i, frozenset(by_color[j] for j in part.snapshot(i)))
                for i in by_color))
    return ChromaticComplex(frozenset(facets))


def chr_iter(n: int, m: int) -> ChromaticComplex:
    if n < 1 or m < 1:
        raise ValueError("need n >= 1 and m >= 1")
    check_budget(fubini(n) ** m, f"Chr^{m} of the {n}-process simplex")
    return ChromaticComplex(frozenset(run_facet(r) for r in enumerate_runs(range(1, n + 1), m)))


def simplex_complex(n: int) -> ChromaticComplex:
    return closure([standard_simplex(n)])


def run_of_facet(facet: Iterable[Vertex]) -> RunSequence:
    """Recover the run that produced a facet of ``Chr^m``.

    Inverse of :func:`run_facet` for facets built from corners of ``s``.
    """
    facet = list(facet)
    rounds = []
    level = facet
    while level[0].label is not None:
        # Snapshot sizes order the blocks; equal snapshots share a block.
        groups: dict[frozenset, set] = {}
        for v in level:
            groups.setdefault(frozenset(u.color for u in v.label), set()).add(v.color)
        order = sorted(groups, key=len)
        rounds.append(OrderedPartition(tuple(frozenset(groups[g]) for g in order)))
        level = [v.previous() for v in level]
    return RunSequence(tuple(reversed(rounds)))


# ---------------------------------------------------------------- geometry

def geometric_point(v: Vertex, n: int) -> tuple:
    """Exact barycentric coordinates of a subdivision vertex.

    A vertex seeing ``k`` vertices sits at weight ``1/(2k-1)`` on its own
    previous position and ``2/(2k-1)`` on each other seen position.
    """
    if not 1 <= v.color <= n:
        raise ValueError(f"color {v.color} outside 1..{n}")
    return _point(v, n)


@lru_cache(maxsize=None)
def _point(v: Vertex, n: int) -> tuple:
    if v.label is None:
        return tuple(Fraction(int(j == v.color)) for j in range(1, n + 1))
    if v.color not in {u.color for u in v.label}:
        raise ValueError(f"vertex {v!r} does not see itself")
    k = len(v.label)
    own = Fraction(1, 2 * k - 1)
    other = Fraction(2, 2 * k - 1)
    acc = [Fraction(0)] * n
    for u in v.label:
        w = own if u.color == v.color else other
        for idx, x in enumerate(_point(u, n)):
            acc[idx] += w * x
    return tuple(acc)


def chr1_vertex(i: int, seen: Iterable[int]) -> Vertex:
    """The ``Chr(s)`` vertex of process ``i`` having seen ``seen``."""
    seen = frozenset(seen)
    if i not in seen:
        raise ValueError(f"process {i} must see itself")
    return make_vertex(i, frozenset(base_vertex(j) for j in seen))


# Planar layout of the 2-simplex: corner 1 bottom-left, 2 bottom-right, 3 top.
_CORNERS = ((Fraction(0), Fraction(0)), (Fraction(1), Fraction(0)), (Fraction(1, 2), Fraction(1)))


def planar(point: Sequence[Fraction]) -> tuple:
    if len(point) != 3:
        raise ValueError("planar layout exists only for three processes")
    x = sum(c * corner[0] for c, corner in zip(point, _CORNERS))
    y = sum(c * corner[1] for c, corner in zip(point, _CORNERS))
    return x, y


def signed_area(facet: Iterable[Vertex]) -> Fraction:
    pts = [planar(geometric_point(v, 3)) for v in sorted(facet, key=lambda v: v.color)]
    if len(pts) != 3:
        raise ValueError("area needs a triangle")
    (x1, y1), (x2, y2), (x3, y3) = pts
    return ((x2 - x1) * (y3 - y1) - (x3 - x1) * (y2 - y1)) / 2


FILL = {1: "red", 2: "blue", 3: "white"}


def to_svg(c: ChromaticComplex, scale: int = 400,
           highlight: Optional[Callable[[frozenset], bool]] = None) -> str:
    """Render a 2-dimensional complex over three processes."""
    if c.colors - {1, 2, 3}:
        raise ValueError("SVG export supports three processes only")
    pad = 20
    height = scale
    w = scale + 2 * pad
    h = height + 2 * pad

    def xy(v: Vertex) -> tuple:
        x, y = planar(geometric_point(v, 3))
        return float(pad + x * scale), float(pad + (1 - y) * height)

    facets = sorted(c.facets, key=lambda f: sorted(v.canonical for v in f))
    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
             f'viewBox="0 0 {w} {h}">']
    for f in facets:
        pts = " ".join(f"{x:.3f},{y:.3f}" for x, y in (xy(v) for v in sorted(f, key=lambda v: v.color)))
        fill = "#c8c8c8" if highlight is not None and highlight(f) else "none"
        tag = "polygon" if len(f) == 3 else "polyline"
        lines.append(f'  <{tag} points="{pts}" fill="{fill}" stroke="black" stroke-width="1"/>')
    for v in sorted(c.vertices, key=lambda v: v.canonical):
        x, y = xy(v)
        lines.append(f'  <circle cx="{x:.3f}" cy="{y:.3f}" r="4" fill="{FILL[v.color]}" '
                     f'stroke="black" stroke-width="1"><title>{v.canonical}</title></circle>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
