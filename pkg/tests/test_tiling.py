import cmath
import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hitlab.tiling import (
    BoundaryRegion,
    TilingGraph,
    build_tiling,
    contiguous_regions,
    edge_length,
    embed,
    graph_length,
    greedy_wedge,
    is_hyperbolic,
    minimal_cut,
    to_svg,
)


# ----------------------------------------------------------- geometric oracle


def _to_origin(z, x):
    return (x - z) / (1 - z.conjugate() * x)


def _from_origin(z, y):
    return (y + z) / (1 + z.conjugate() * y)


def geometric_patch(p, q, layers):
    """Counts of a patch grown from tile vertices placed in the Poincare disk.

    Independent of the combinatorial builder: neighbours come from hyperbolic
    rotations, faces from angular order, layers from the same growth rule.
    """
    r = math.tanh(edge_length(p, q) / 2)
    radius = layers * (p // 2 + 1) + 2
    pos = [0j]
    key = {(0, 0): 0}
    nbrs = {}
    first = [r * cmath.exp(2j * math.pi * i / q) for i in range(q)]
    frontier, dist, seed = [0], {0: 0}, {}

    def vid(z):
        k = (round(z.real, 9), round(z.imag, 9))
        if k not in key:
            key[k] = len(pos)
            pos.append(z)
        return key[k]

    while frontier:
        nxt = []
        for v in frontier:
            z = pos[v]
            if v == 0:
                pts = first
            else:
                w0 = _to_origin(z, pos[seed[v]])
                pts = [_from_origin(z, w0 * cmath.exp(2j * math.pi * i / q)) for i in range(q)]
            ids = [vid(x) for x in pts]
            nbrs[v] = ids
            for w in ids:
                if w not in dist:
                    dist[w] = dist[v] + 1
                    seed[w] = v
                    if dist[w] < radius:
                        nxt.append(w)
        frontier = nxt

    def ccw(v):
        z = pos[v]
        return sorted(nbrs[v], key=lambda w: cmath.phase(_to_origin(z, pos[w])))

    order = {v: ccw(v) for v in nbrs if len(nbrs[v]) == q}

    def face(u, v):
        cyc = [u]
        a, b = u, v
        while b != u:
            cyc.append(b)
            if b not in order:
                return None
            o = order[b]
            c = o[(o.index(a) - 1) % q]
            a, b = b, c
            if len(cyc) > p:
                return None
        return frozenset(cyc)

    def faces_at(v):
        out = set()
        for w in order[v]:
            f = face(v, w)
            assert f is not None and len(f) == p
            out.add(f)
        return out

    patch, last = {0}, {0}
    for _ in range(layers):
        grown = set(patch)
        for v in last:
            for f in faces_at(v):
                grown |= f
        last = grown - patch
        patch = grown
    internal = {frozenset((v, w)) for v in patch for w in nbrs[v] if w in patch}
    legs = sum(1 for v in patch for w in nbrs[v] if w not in patch)
    return len(patch), len(internal), legs


CASES = [(7, 3, 0), (7, 3, 1), (7, 3, 2), (5, 4, 1), (5, 4, 2), (4, 5, 1), (4, 5, 2), (8, 3, 1), (6, 4, 1)]


@pytest.mark.parametrize("p,q,layers", CASES)
def test_counts_match_geometric_construction(p, q, layers):
    g = build_tiling(p, q, layers)
    assert (len(g.vertices), len(g.internal_edges()), g.n_boundary) == geometric_patch(p, q, layers)


FROZEN = {
    (7, 3, 0): (1, 0, 3),
    (7, 3, 1): (16, 18, 12),
    (7, 3, 2): (61, 75, 33),
    (5, 4, 1): (13, 16, 20),
    (5, 4, 2): (61, 84, 76),
    (4, 5, 2): (51, 80, 95),
}


@pytest.mark.parametrize("pql", sorted(FROZEN))
def test_frozen_counts(pql):
    g = build_tiling(*pql)
    assert (len(g.vertices), len(g.internal_edges()), g.n_boundary) == FROZEN[pql]


def test_rejects_non_hyperbolic():
    assert not is_hyperbolic(6, 3)
    assert not is_hyperbolic(4, 4)
    assert is_hyperbolic(7, 3)
    with pytest.raises(ValueError):
        build_tiling(4, 4, 1)
    with pytest.raises(ValueError):
        build_tiling(7, 3, -1)


def _inner_faces(g):
    """Face walks of the internal-edge graph using the rotation system."""
    def nxt(v, e):
        edges = [x for x in g.vertices[v].edges if not g.edges[x].is_boundary]
        return edges[(edges.index(e) - 1) % len(edges)]

    darts = {(e.id, e.ends[0]) for e in g.internal_edges()} | {(e.id, e.ends[1]) for e in g.internal_edges()}
    sizes = []
    while darts:
        e, v = start = darts.pop()
        n = 1
        while True:
            u, w = g.edges[e].ends
            head = w if v == u else u
            e, v = nxt(head, e), head
            if (e, v) == start:
                break
            darts.discard((e, v))
            n += 1
        sizes.append(n)
    return sizes


@pytest.mark.parametrize("p,q,layers", [(7, 3, 1), (7, 3, 2), (5, 4, 2), (4, 5, 1)])
def test_euler_and_degrees(p, q, layers):
    g = build_tiling(p, q, layers)
    assert all(len(v.edges) == q for v in g.vertices)
    V, E = len(g.vertices), len(g.internal_edges())
    sizes = sorted(_inner_faces(g))
    # every bounded face is a complete p-gon; one outer face remains
    assert sizes[:-1] == [p] * (len(sizes) - 1)
    assert V - E + len(sizes) == 2


def test_outer_pattern_73_layer1():
    g = build_tiling(7, 3, 1)
    assert sorted(g.outer_faces) == [2] * 9 + [3] * 3
    assert len(g.outer_faces) == g.n_boundary


def test_json_roundtrip():
    g = build_tiling(5, 4, 1)
    h = TilingGraph.from_json(g.to_json())
    assert h == g
    assert h.outer_faces == g.outer_faces


def test_embedding_edge_lengths():
    g = build_tiling(7, 3, 2)
    z = embed(g)
    d = edge_length(7, 3)
    for e in g.internal_edges():
        a, b = z[e.ends[0]], z[e.ends[1]]
        hyp = 2 * math.atanh(abs((a - b) / (1 - a.conjugate() * b)))
        assert hyp == pytest.approx(d, abs=1e-9)
    pts = [z[v.id] for v in g.vertices]
    gaps = [abs(a - b) for i, a in enumerate(pts) for b in pts[i + 1:]]
    assert min(gaps) > 1e-3


def test_svg_mentions_every_edge():
    g = build_tiling(7, 3, 1)
    cut = minimal_cut(g, BoundaryRegion(0, 6, 12))
    svg = to_svg(g, cut)
    assert svg.startswith("<svg") and svg.count("<line") == len(g.edges)
    assert svg.count("#d62728") == len(cut.edges)


# -------------------------------------------------------------- cut oracles


def _nx_cut_value(g, region):
    G = nx.DiGraph()
    inside = set(region.legs(g))
    for e in g.edges:
        u = e.ends[0]
        w = ("leg", e.id) if e.is_boundary else e.ends[1]
        G.add_edge(u, w, capacity=1)
        G.add_edge(w, u, capacity=1)
        if e.is_boundary:
            if e.id in inside:
                G.add_edge("s", w)
            else:
                G.add_edge(w, "t")
    value, _ = nx.minimum_cut(G, "s", "t")
    return value


@pytest.mark.parametrize("p,q,layers", [(7, 3, 1), (7, 3, 2), (5, 4, 1)])
def test_min_cut_matches_networkx(p, q, layers):
    g = build_tiling(p, q, layers)
    for r in contiguous_regions(g.n_boundary):
        assert graph_length(minimal_cut(g, r)) == _nx_cut_value(g, r)


def _exhaustive(g, region):
    """Every vertex subset: min cut size and the union of optimal region sides."""
    nv = len(g.vertices)
    masks = np.arange(2**nv, dtype=np.int64)
    size = np.zeros(masks.shape, dtype=np.int64)
    inside = set(region.legs(g))
    for e in g.edges:
        a = (masks >> e.ends[0]) & 1
        if e.is_boundary:
            size += a != (1 if e.id in inside else 0)
        else:
            size += a != ((masks >> e.ends[1]) & 1)
    best = size.min()
    union = 0
    for m in masks[size == best]:
        union |= int(m)
    return int(best), frozenset(v for v in range(nv) if union >> v & 1)


def test_min_cut_exhaustive_73_layer1():
    g = build_tiling(7, 3, 1)
    for r in contiguous_regions(g.n_boundary):
        cut = minimal_cut(g, r)
        best, wedge = _exhaustive(g, r)
        assert graph_length(cut) == best
        assert cut.wedge == wedge


def test_half_boundary_cut_73():
    g = build_tiling(7, 3, 1)
    cut = minimal_cut(g, BoundaryRegion(0, 6, 12))
    assert graph_length(cut) == 3
    assert cut.wedge == frozenset({0, 1, 2, 7, 8, 9, 10, 11, 15})


def test_improper_regions():
    g = build_tiling(7, 3, 1)
    assert graph_length(minimal_cut(g, BoundaryRegion(0, 0, 12))) == 0
    full = minimal_cut(g, BoundaryRegion(0, 12, 12))
    assert graph_length(full) == 0 and len(full.wedge) == len(g.vertices)
    with pytest.raises(ValueError):
        BoundaryRegion(0, 13, 12)


G73 = build_tiling(7, 3, 2)
regions73 = st.builds(
    lambda s, l: BoundaryRegion(s, l, G73.n_boundary),
    st.integers(0, G73.n_boundary - 1),
    st.integers(1, G73.n_boundary - 1),
)


@settings(max_examples=60, deadline=None)
@given(regions73)
def test_cut_symmetric_under_complement(r):
    a, b = minimal_cut(G73, r), minimal_cut(G73, r.complement())
    assert graph_length(a) == graph_length(b)
    assert graph_length(a) <= min(r.length, r.n - r.length)


@settings(max_examples=60, deadline=None)
@given(regions73, st.integers(1, 5))
def test_wedge_nesting(r, grow):
    bigger = BoundaryRegion(r.start, min(r.length + grow, r.n - 1), r.n)
    assert minimal_cut(G73, r).wedge <= minimal_cut(G73, bigger).wedge


@settings(max_examples=30, deadline=None)
@given(regions73)
def test_greedy_wedge_inside_entanglement_wedge(r):
    wedge, strip = greedy_wedge(G73, r)
    other, _ = greedy_wedge(G73, r.complement())
    assert wedge <= minimal_cut(G73, r).wedge
    assert not strip & (wedge | other)
    assert strip | wedge | other == frozenset(v.id for v in G73.vertices)
