import itertools
import json

import pytest
from hypothesis import given, settings, strategies as st

from rkaffine.complex_core import (
    ChromaticComplex,
    ChromaticError,
    Vertex,
    base_vertex,
    boundary_touching_facets,
    closure,
    components,
    is_connected,
    skeleton,
    standard_simplex,
    to_json,
    to_json_dict,
)
from rkaffine.subdivision import chr, chr_iter, simplex_complex

S3 = simplex_complex(3)
CHR1 = chr_iter(3, 1)


def test_vertex_carrier_and_depth():
    a, b = base_vertex(1), base_vertex(2)
    v = Vertex(1, frozenset({a, b}))
    assert v.carrier == {1, 2}
    assert v.depth == 1
    assert v.previous() == a
    assert v.canonical == "1{1,2}"
    with pytest.raises(ValueError):
        a.previous()


def test_repeated_color_rejected():
    v = Vertex(1, frozenset({base_vertex(1)}))
    with pytest.raises(ChromaticError):
        ChromaticComplex(frozenset({frozenset({base_vertex(1), v})}))


def test_skeleton_examples():
    assert len(skeleton(S3, 0).facets) == 3
    assert skeleton(S3, 2) == S3
    with pytest.raises(ValueError):
        skeleton(S3, 3)


def test_skeleton_edges_match_brute_force():
    brute = {frozenset(e) for f in CHR1.facets for e in itertools.combinations(f, 2)}
    assert skeleton(CHR1, 1).facets == brute
    # the edge graph of Chr(s) at n=3: 13 triangles, 12 vertices, Euler gives 24 edges
    assert len(brute) == 24
    assert len(CHR1.vertices) == 12


def test_purity_and_extension():
    for c in (S3, CHR1, chr_iter(3, 2)):
        assert c.is_pure()
        for f in c.facets:
            assert len({v.color for v in f}) == c.dimension + 1
        some = sorted(c.simplices, key=lambda s: sorted(v.canonical for v in s))[:50]
        for s in some:
            assert any(s <= f for f in c.facets)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 12), min_size=1, max_size=6), st.data())
def test_closure_idempotent(idx, data):
    facets = sorted(CHR1.facets, key=lambda f: sorted(v.canonical for v in f))
    chosen = []
    for i in idx:
        f = sorted(facets[i], key=lambda v: v.color)
        size = data.draw(st.integers(1, 3))
        chosen.append(frozenset(f[:size]))
    c = closure(chosen)
    assert closure(c.facets) == c
    # nothing maximal is lost and nothing dominated is kept
    for s in chosen:
        assert any(s <= f for f in c.facets)
    for f, g in itertools.permutations(c.facets, 2):
        assert not f < g


def test_components():
    a = frozenset({base_vertex(1), base_vertex(2)})
    b = frozenset({Vertex(3, frozenset({base_vertex(3)}))})
    c = closure([a, b])
    assert len(components(c)) == 2
    assert not is_connected(c)
    assert is_connected(CHR1)


def test_boundary_touching_r2_definition():
    # Chr^2 facets touching the boundary of s are exactly those whose largest
    # contention set has fewer than three members (brute force over carriers)
    chr2 = chr_iter(3, 2)
    touching = boundary_touching_facets(chr2, S3)
    brute = set()
    for f in chr2.facets:
        groups = {}
        for v in f:
            groups.setdefault(v.carrier, []).append(v)
        if max(len(g) for g in groups.values()) <= 2:
            brute.add(f)
    assert touching == brute
    assert len(touching) == 72


def test_json_export_is_stable_and_well_formed():
    d = to_json_dict(CHR1, 3)
    assert d["n"] == 3 and d["dimension"] == 2
    assert len(d["facets"]) == 13
    assert [v["id"] for v in d["vertices"]] == list(range(12))
    labels = [(v["label"], v["color"]) for v in d["vertices"]]
    assert labels == sorted(labels)
    assert to_json(CHR1, 3) == to_json(chr(S3), 3)
    json.loads(to_json(CHR1))


def test_standard_simplex():
    assert len(standard_simplex(4)) == 4
    with pytest.raises(ValueError):
        standard_simplex(0)
