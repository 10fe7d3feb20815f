"""Pure chromatic simplicial complexes.

A vertex is a ``(color, label)`` pair. Colors are process ids ``1..n``; the
label is an opaque, hashable view token. For the standard simplex the label is
``None``; for a vertex of ``Chr C`` it is the frozenset of vertices of ``C``
the process saw, so vertices of iterated subdivisions nest and glue purely by
structural equality.

Complexes are stored by their facets. The full face poset is materialized
lazily, since ``Chr^2`` of a 3-simplex already has thousands of simplices.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Optional

Simplex = frozenset  # frozenset[Vertex]


class ChromaticError(ValueError):
    """A simplex repeats a color."""


@dataclass(frozen=True)
class Vertex:
    color: int
    label: Optional[frozenset] = None

    def __repr__(self) -> str:
        return f"Vertex({self.canonical})"

    @cached_property
    def carrier(self) -> frozenset:
        """Colors of every process this vertex (transitively) saw."""
        if self.label is None:
            return frozenset((self.color,))
        out: set[int] = set()
        for u in self.label:
            out |= u.carrier
        return frozenset(out)

    @cached_property
    def depth(self) -> int:
        """Number of subdivision levels above the standard simplex."""
        if self.label is None:
            return 0
        return 1 + max(u.depth for u in self.label)

    @cached_property
    def label_str(self) -> str:
        if self.label is None:
            return ""
        return "{" + ",".join(sorted(u.canonical for u in self.label)) + "}"

    @cached_property
    def canonical(self) -> str:
        return f"{self.color}{self.label_str}"

    def previous(self) -> "Vertex":
        """The same process's vertex one subdivision level down."""
        if self.label is None:
            raise ValueError("vertex of the standard simplex has no predecessor")
        for u in self.label:
            if u.color == self.color:
                return u
        raise ValueError(f"label of {self!r} lacks its own color")


def base_vertex(color: int) -> Vertex:
    return Vertex(color, None)


def standard_simplex(n: int) -> frozenset:
    """The vertex set of the standard simplex on colors ``1..n``."""
    if n < 1:
        raise ValueError("n must be positive")
    return frozenset(base_vertex(i) for i in range(1, n + 1))


def colors(simplex: Iterable[Vertex]) -> frozenset:
    return frozenset(v.color for v in simplex)


def check_chromatic(simplex: frozenset) -> None:
    if not simplex:
        raise ChromaticError("empty simplex")
    if len({v.color for v in simplex}) != len(simplex):
        raise ChromaticError(f"repeated color in simplex {sorted(v.canonical for v in simplex)}")


def nonempty_faces(simplex: frozenset) -> Iterator[frozenset]:
    items = sorted(simplex, key=lambda v: v.color)
    for size in range(1, len(items) + 1):
        for combo in itertools.combinations(items, size):
            yield frozenset(combo)


def _maximal(simplices: frozenset) -> frozenset:
    dominated: set[frozenset] = set()
    for f in simplices:
        if len(f) > 1 and f not in dominated:
            for size in range(1, len(f)):
                dominated.update(frozenset(c) for c in itertools.combinations(f, size))
    return frozenset(f for f in simplices if f not in dominated)


@dataclass(frozen=True)
class ChromaticComplex:
    """A chromatic complex given by its maximal simplices."""

    facets: frozenset
    dimension: int = field(default=-1, compare=False)

    def __post_init__(self) -> None:
        facets = frozenset(frozenset(f) for f in self.facets)
        for f in facets:
            check_chromatic(f)
        maximal = _maximal(facets)
        object.__setattr__(self, "facets", maximal)
        dim = max((len(f) for f in maximal), default=0) - 1
        object.__setattr__(self, "dimension", dim)

    @cached_property
    def simplices(self) -> frozenset:
        out: set[frozenset] = set()
        for f in self.facets:
            out.update(nonempty_faces(f))
        return frozenset(out)

    @cached_property
    def vertices(self) -> frozenset:
        return frozenset(v for f in self.facets for v in f)

    @cached_property
    def colors(self) -> frozenset:
        return colors(self.vertices)

    def is_pure(self) -> bool:
        return all(len(f) == self.dimension + 1 for f in self.facets)

    def __len__(self) -> int:
        return len(self.facets)

    def __contains__(self, simplex: object) -> bool:
        return simplex in self.simplices

    def top_facets(self) -> frozenset:
        return frozenset(f for f in self.facets if len(f) == self.dimension + 1)


def closure(facets: Iterable[Iterable[Vertex]]) -> ChromaticComplex:
    facets = [frozenset(f) for f in facets]
    if not facets:
        raise ValueError("closure needs at least one simplex")
    return ChromaticComplex(frozenset(facets))


def components(c: ChromaticComplex) -> list[frozenset]:
    """Connected components of the 1-skeleton, as vertex sets."""
    parent: dict[Vertex, Vertex] = {v: v for v in c.vertices}

    def find(v: Vertex) -> Vertex:
        while parent[v] is not v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for f in c.facets:
        it = iter(f)
        root = find(next(it))
        for v in it:
            other = find(v)
            if other is not root:
                parent[other] = root
    groups: dict[Vertex, set] = {}
    for v in c.vertices:
        groups.setdefault(find(v), set()).add(v)
    return sorted((frozenset(g) for g in groups.values()),
                  key=lambda g: min(v.canonical for v in g))


def is_connected(c: ChromaticComplex) -> bool:
    if not c.facets:
        raise ValueError("empty complex")
    return len(components(c)) == 1


def skeleton(c: ChromaticComplex, k: int) -> ChromaticComplex:
    if not 0 <= k <= c.dimension:
        raise ValueError(f"skeleton dimension {k} outside 0..{c.dimension}")
    faces: set[frozenset] = set()
    for f in c.facets:
        if len(f) <= k + 1:
            faces.add(f)
        else:
            faces.update(frozenset(s) for s in itertools.combinations(f, k + 1))
    return ChromaticComplex(frozenset(faces))


def boundary_touching_facets(c: ChromaticComplex, ambient: ChromaticComplex) -> frozenset:
    """Facets of ``c`` with a vertex carried by a proper face of ``ambient``."""
    full = ambient.colors
    return frozenset(f for f in c.top_facets() if any(v.carrier != full for v in f))


def to_json_dict(c: ChromaticComplex, n: Optional[int] = None) -> dict:
    verts = sorted(c.vertices, key=lambda v: (v.label_str, v.color))
    ids = {v: i for i, v in enumerate(verts)}
    facets = sorted(sorted(ids[v] for v in f) for f in c.facets)
    return {
        "n": n if n is not None else len(c.colors),
        "dimension": c.dimension,
        "vertices": [{"id": ids[v], "color": v.color, "label": v.label_str} for v in verts],
        "facets": facets,
    }


def to_json(c: ChromaticComplex, n: Optional[int] = None) -> str:
    return json.dumps(to_json_dict(c, n), sort_keys=True, separators=(",", ":"))
