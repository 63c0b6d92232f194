"""Finite patches of hyperbolic (p, q) tilings and their graph geometry.

A patch is grown combinatorially from a single q-valent vertex.  Every vertex
keeps its incident edges in counterclockwise order (a rotation system), which
is all the planar structure the network code needs.  Edges that leave the
patch are kept as dangling *boundary legs*, ordered counterclockwise around
the disk.
"""

from __future__ import annotations

import cmath
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

BOUNDARY = "boundary"


@dataclass(frozen=True)
class Vertex:
    id: int
    layer: int
    edges: tuple[int, ...]  # counterclockwise


@dataclass(frozen=True)
class Edge:
    id: int
    ends: tuple  # (u, v) or (u, "boundary")

    @property
    def is_boundary(self) -> bool:
        return self.ends[1] == BOUNDARY


@dataclass(frozen=True)
class TilingGraph:
    p: int
    q: int
    layers: int
    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...]
    boundary: tuple[int, ...]
    # number of patch vertices on each outer face, one entry per gap between
    # consecutive boundary legs (gap i follows boundary[i])
    outer_faces: tuple[int, ...] = field(default=(), compare=False)

    @property
    def n_boundary(self) -> int:
        return len(self.boundary)

    def internal_edges(self) -> list[Edge]:
        return [e for e in self.edges if not e.is_boundary]

    def slot_of(self, v: int, e: int) -> int:
        """Position of edge ``e`` in the rotation of vertex ``v``."""
        return self.vertices[v].edges.index(e)

    def boundary_position(self, e: int) -> int:
        return self.boundary.index(e)

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "q": self.q,
            "layers": self.layers,
            "vertices": [
                {"id": v.id, "layer": v.layer, "edges": list(v.edges)} for v in self.vertices
            ],
            "edges": [{"id": e.id, "ends": list(e.ends)} for e in self.edges],
            "boundary": list(self.boundary),
            "outer_faces": list(self.outer_faces),
        }

    @classmethod
    def from_json(cls, data: dict) -> "TilingGraph":
        vertices = tuple(
            Vertex(int(v["id"]), int(v["layer"]), tuple(int(x) for x in v["edges"]))
            for v in data["vertices"]
        )
        edges = []
        for e in data["edges"]:
            a, b = e["ends"]
            edges.append(Edge(int(e["id"]), (int(a), BOUNDARY if b == BOUNDARY else int(b))))
        graph = cls(
            p=int(data["p"]),
            q=int(data["q"]),
            layers=int(data["layers"]),
            vertices=vertices,
            edges=tuple(edges),
            boundary=tuple(int(x) for x in data["boundary"]),
            outer_faces=tuple(int(x) for x in data.get("outer_faces", ())),
        )
        _check_graph(graph)
        return graph


def is_hyperbolic(p: int, q: int) -> bool:
    return (p - 2) * (q - 2) > 4


class _Builder:
    """Rotation-system growth of a vertex-centred patch."""

    def __init__(self, p: int, q: int):
        self.p, self.q = p, q
        self.nbr: list[list[tuple[int, int] | None]] = []
        self.layer: list[int] = []
        self.done: set[tuple[int, int]] = set()  # corners of completed faces
        self.order: list[tuple[int, int, int, int]] = []  # edge creation order

    def add_vertex(self, layer: int) -> int:
        self.nbr.append([None] * self.q)
        self.layer.append(layer)
        return len(self.nbr) - 1

    def link(self, u: int, su: int, v: int, sv: int) -> None:
        if self.nbr[u][su] is not None or self.nbr[v][sv] is not None:
            raise RuntimeError(f"slot collision while linking {u}:{su} - {v}:{sv}")
        self.nbr[u][su] = (v, sv)
        self.nbr[v][sv] = (u, su)
        self.order.append((u, su, v, sv))

    def walk(self, v: int, i: int) -> tuple[list[int], tuple[int, int], tuple[int, int], bool]:
        """Follow the face at corner (v, i) along existing edges in both directions."""
        q = self.q
        start = (v, i)
        fwd = [v]
        cur = start
        while True:
            w = self.nbr[cur[0]][(cur[1] + 1) % q]
            if w is None:
                break
            cur = w
            if cur == start:
                return fwd, cur, cur, True
            fwd.append(cur[0])
        front = cur
        back_path = []
        cur = start
        while True:
            u = self.nbr[cur[0]][cur[1]]
            if u is None:
                break
            cur = (u[0], (u[1] - 1) % q)
            back_path.append(cur[0])
        back = cur
        return back_path[::-1] + fwd, front, back, False

    def face_existing(self, v: int, i: int) -> int:
        path, _, _, closed = self.walk(v, i)
        return self.p if closed else len(path)

    def complete(self, v: int, i: int, layer: int) -> None:
        q, p = self.q, self.p
        path, front, back, closed = self.walk(v, i)
        if not closed:
            new = p - len(path)
            if new < 0:
                raise RuntimeError("face overfull; patch growth order is inconsistent")
            fv, fs = front[0], (front[1] + 1) % q
            bv, bs = back
            prev, prev_slot = fv, fs
            for _ in range(new):
                x = self.add_vertex(layer)
                self.link(prev, prev_slot, x, 0)
                prev, prev_slot = x, 1
            self.link(prev, prev_slot, bv, bs)
        # mark every corner of the now-closed face
        cur = (v, i)
        for _ in range(p):
            self.done.add(cur)
            cur = self.nbr[cur[0]][(cur[1] + 1) % q]
        if cur != (v, i):
            raise RuntimeError("face did not close after p steps")


def build_tiling(p: int, q: int, layers: int) -> TilingGraph:
    """Vertex-centred patch: layer 0 is one vertex, layer L completes every
    p-gon touching a vertex of layer L-1."""
    if p < 3 or q < 3:
        raise ValueError("p and q must both be at least 3")
    if not is_hyperbolic(p, q):
        raise ValueError(f"({p},{q}) is not hyperbolic: need (p-2)(q-2) > 4")
    if layers < 0:
        raise ValueError("layers must be non-negative")

    b = _Builder(p, q)
    b.add_vertex(0)
    for layer in range(1, layers + 1):
        frontier = [v for v in range(len(b.nbr)) if b.layer[v] == layer - 1]
        while True:
            pending = [(v, i) for v in frontier for i in range(q) if (v, i) not in b.done]
            if not pending:
                break
            # grow next to existing structure so each face meets the patch in one arc
            anchored = [c for c in pending if b.face_existing(*c) >= 2]
            b.complete(*(anchored[0] if anchored else pending[0]), layer)
    return _freeze(b, p, q, layers)


def _freeze(b: _Builder, p: int, q: int, layers: int) -> TilingGraph:
    n = len(b.nbr)
    slot_edge: dict[tuple[int, int], int] = {}
    edges: list[Edge] = []
    for (u, su, v, sv) in b.order:
        eid = len(edges)
        edges.append(Edge(eid, (u, v)))
        slot_edge[(u, su)] = eid
        slot_edge[(v, sv)] = eid

    boundary_slots, outer = _outer_walk(b)
    boundary = []
    for (v, s) in boundary_slots:
        eid = len(edges)
        edges.append(Edge(eid, (v, BOUNDARY)))
        slot_edge[(v, s)] = eid
        boundary.append(eid)

    vertices = tuple(
        Vertex(v, b.layer[v], tuple(slot_edge[(v, s)] for s in range(q))) for v in range(n)
    )
    graph = TilingGraph(p, q, layers, vertices, tuple(edges), tuple(boundary), tuple(outer))
    _check_graph(graph)
    return graph


def _outer_walk(b: _Builder) -> tuple[list[tuple[int, int]], list[int]]:
    """Counterclockwise walk along the outer face, emitting empty slots."""
    q = b.q
    open_vertices = [v for v in range(len(b.nbr)) if any(x is None for x in b.nbr[v])]
    if not open_vertices:
        return [], []
    v0 = open_vertices[0]
    filled = [s for s in range(q) if b.nbr[v0][s] is not None]
    if not filled:  # single vertex
        return [(v0, s) for s in range(q)], [1] * q
    a0 = next(s for s in filled if b.nbr[v0][(s + 1) % q] is None)

    legs: list[tuple[int, int]] = []
    visits: list[int] = []  # vertices passed since the previous leg
    since = 0
    v, a = v0, a0
    while True:
        since += 1
        s = (a + 1) % q
        while b.nbr[v][s] is None:
            legs.append((v, s))
            visits.append(since)
            since = 1
            s = (s + 1) % q
        v, a = b.nbr[v][s]
        if (v, a) == (v0, a0):
            break
    # visits[i] counts vertices between leg i-1 and leg i; the first entry
    # belongs to the wrap-around gap and absorbs the tail of the walk
    visits[0] += since
    gaps = visits[1:] + visits[:1]
    return legs, gaps


def _check_graph(g: TilingGraph) -> None:
    for v in g.vertices:
        if len(v.edges) != g.q or len(set(v.edges)) != g.q:
            raise ValueError(f"vertex {v.id} must have {g.q} distinct incident edges")
    for e in g.edges:
        if e.is_boundary:
            if e.id not in g.boundary:
                raise ValueError(f"dangling edge {e.id} missing from boundary order")
        else:
            u, w = e.ends
            if e.id not in g.vertices[u].edges or e.id not in g.vertices[w].edges:
                raise ValueError(f"edge {e.id} not incident to its ends")
    if len(set(g.boundary)) != len(g.boundary):
        raise ValueError("boundary legs repeat")


# ---------------------------------------------------------------- regions, cuts


@dataclass(frozen=True)
class BoundaryRegion:
    """Contiguous arc of boundary legs (positions modulo ``n``)."""

    start: int
    length: int
    n: int

    def __post_init__(self):
        if not 0 <= self.length <= self.n:
            raise ValueError("region length out of range")

    @property
    def positions(self) -> tuple[int, ...]:
        return tuple((self.start + i) % self.n for i in range(self.length))

    @property
    def is_proper(self) -> bool:
        return 0 < self.length < self.n

    def complement(self) -> "BoundaryRegion":
        return BoundaryRegion((self.start + self.length) % self.n, self.n - self.length, self.n)

    def legs(self, graph: TilingGraph) -> tuple[int, ...]:
        return tuple(graph.boundary[i] for i in self.positions)


def contiguous_regions(n: int) -> list[BoundaryRegion]:
    return [BoundaryRegion(s, l, n) for l in range(1, n) for s in range(n)]


@dataclass(frozen=True)
class Cut:
    edges: frozenset[int]
    wedge: frozenset[int]  # region-side vertices (entanglement wedge)
    endpoints: tuple[int, int]  # boundary gaps spanned by the cut


def _max_flow_min_cut(
    n_nodes: int, arcs: list[tuple[int, int, float]], s: int, t: int
) -> tuple[float, set[int]]:
    """Edmonds-Karp.  Returns flow value and the largest source side."""
    res: list[dict[int, float]] = [dict() for _ in range(n_nodes)]
    for a, b_, c in arcs:
        res[a][b_] = res[a].get(b_, 0.0) + c
        res[b_].setdefault(a, 0.0)
    flow = 0.0
    while True:
        parent = {s: None}
        dq = deque([s])
        while dq and t not in parent:
            x = dq.popleft()
            for y, c in res[x].items():
                if c > 0 and y not in parent:
                    parent[y] = x
                    dq.append(y)
        if t not in parent:
            break
        path = []
        y = t
        while parent[y] is not None:
            path.append((parent[y], y))
            y = parent[y]
        push = min(res[a][b_] for a, b_ in path)
        for a, b_ in path:
            res[a][b_] -= push
            res[b_][a] += push
        flow += push
    # nodes that can still reach t form the smallest sink side
    reaches_t = {t}
    dq = deque([t])
    while dq:
        y = dq.popleft()
        for x in res[y]:
            if x not in reaches_t and res[x].get(y, 0.0) > 0:
                reaches_t.add(x)
                dq.append(x)
    return flow, set(range(n_nodes)) - reaches_t


def minimal_cut(graph: TilingGraph, region: BoundaryRegion) -> Cut:
    """Minimum edge cut between region legs and complement legs.  Among all
    minimum cuts the one with the largest region-side vertex set is returned."""
    gaps = (region.start % max(region.n, 1), (region.start + region.length) % max(region.n, 1))
    if not region.is_proper:
        wedge = frozenset(v.id for v in graph.vertices) if region.length == region.n else frozenset()
        return Cut(frozenset(), wedge, gaps)
    nv = len(graph.vertices)
    leg_node = {e: nv + i for i, e in enumerate(graph.boundary)}
    s, t = nv + graph.n_boundary, nv + graph.n_boundary + 1
    inside = set(region.legs(graph))
    arcs: list[tuple[int, int, float]] = []
    for e in graph.edges:
        u, w = e.ends
        w = leg_node[e.id] if e.is_boundary else w
        arcs.append((u, w, 1.0))
        arcs.append((w, u, 1.0))
    big = float(len(graph.edges) + 1)
    for e, node in leg_node.items():
        arcs.append((s, node, big) if e in inside else (node, t, big))
    _, side = _max_flow_min_cut(nv + graph.n_boundary + 2, arcs, s, t)
    cut = set()
    for e in graph.edges:
        u, w = e.ends
        w = leg_node[e.id] if e.is_boundary else w
        if (u in side) != (w in side):
            cut.add(e.id)
    wedge = frozenset(v for v in range(nv) if v in side)
    return Cut(frozenset(cut), wedge, gaps)


def graph_length(cut: Cut) -> int:
    return len(cut.edges)


@dataclass(frozen=True)
class IsometryRuleSet:
    """Local absorption moves licensed by the hyperinvariance relations."""

    single: bool = True  # A with all legs but one traced
    pair: bool = True  # A-B-A with all legs but the two distinguished ones traced


def _absorb(graph: TilingGraph, traced: set[int], rules: IsometryRuleSet) -> set[int]:
    q = graph.q
    absorbed: set[int] = set()
    changed = True
    while changed:
        changed = False
        for v in graph.vertices:
            if v.id in absorbed:
                continue
            if rules.single and sum(e in traced for e in v.edges) >= q - 1:
                absorbed.add(v.id)
                traced.update(v.edges)
                changed = True
        if changed or not rules.pair:
            continue
        for e in graph.internal_edges():
            u, w = e.ends
            if u in absorbed or w in absorbed:
                continue
            su, sw = graph.slot_of(u, e.id), graph.slot_of(w, e.id)
            eu, ew = graph.vertices[u].edges, graph.vertices[w].edges
            # the two faces on either side of e
            for du, dw in ((eu[(su + 1) % q], ew[(sw - 1) % q]), (eu[(su - 1) % q], ew[(sw + 1) % q])):
                rest = (set(eu) | set(ew)) - {e.id, du, dw}
                if rest <= traced:
                    absorbed.update((u, w))
                    traced.update(eu)
                    traced.update(ew)
                    changed = True
                    break
            if changed:
                break
    return absorbed


def greedy_wedge(
    graph: TilingGraph, region: BoundaryRegion, rules: IsometryRuleSet | None = None
) -> tuple[frozenset[int], frozenset[int]]:
    """Greedy fixed point of isometry absorptions starting from ``region``.

    Returns ``(wedge, strip)`` where the strip holds the vertices reached by
    neither the region nor its complement.
    """
    rules = rules or IsometryRuleSet()
    mine = _absorb(graph, set(region.legs(graph)), rules)
    other = _absorb(graph, set(region.complement().legs(graph)), rules)
    everything = {v.id for v in graph.vertices}
    return frozenset(mine), frozenset(everything - mine - other)


# ------------------------------------------------------------------ embedding


def _mobius_rot(theta: float):
    return (cmath.exp(0.5j * theta), 0.0, 0.0, cmath.exp(-0.5j * theta))


def _mobius_shift(d: float):
    c, s = math.cosh(d / 2), math.sinh(d / 2)
    return (c, s, s, c)


def _mul(m, n):
    a, b, c, d = m
    e, f, g, h = n
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def _apply(m, z):
    a, b, c, d = m
    return (a * z + b) / (c * z + d)


def edge_length(p: int, q: int) -> float:
    """Hyperbolic length of one edge of the regular {p, q} tiling."""
    return 2.0 * math.acosh(math.cos(math.pi / p) / math.sin(math.pi / q))


def embed(graph: TilingGraph) -> dict[int, complex]:
    """Poincare-disk coordinates for drawing.  Presentational only."""
    q = graph.q
    d = edge_length(graph.p, q)
    frames = {0: _mobius_rot(0.0)}
    dq = deque([0])
    while dq:
        v = dq.popleft()
        for i, e in enumerate(graph.vertices[v].edges):
            edge = graph.edges[e]
            if edge.is_boundary:
                continue
            w = edge.ends[1] if edge.ends[0] == v else edge.ends[0]
            if w in frames:
                continue
            j = graph.slot_of(w, e)
            m = _mul(frames[v], _mobius_rot(2 * math.pi * i / q))
            m = _mul(m, _mobius_shift(d))
            frames[w] = _mul(m, _mobius_rot(math.pi - 2 * math.pi * j / q))
            dq.append(w)
    coords = {v: _apply(f, 0.0) for v, f in frames.items()}
    for e in graph.boundary:
        v = graph.edges[e].ends[0]
        i = graph.slot_of(v, e)
        m = _mul(_mul(frames[v], _mobius_rot(2 * math.pi * i / q)), _mobius_shift(d / 2))
        coords[("leg", e)] = _apply(m, 0.0)
    return coords


def to_svg(graph: TilingGraph, cut: Cut | None = None, size: int = 600) -> str:
    coords = embed(graph)
    half = size / 2

    def xy(z):
        return half + 0.95 * half * z.real, half - 0.95 * half * z.imag

    highlighted = cut.edges if cut else frozenset()
    wedge = cut.wedge if cut else frozenset()
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}">',
        f'<circle cx="{half}" cy="{half}" r="{0.95 * half}" fill="none" stroke="#999"/>',
    ]
    for e in graph.edges:
        a = coords[e.ends[0]]
        b = coords[("leg", e.id)] if e.is_boundary else coords[e.ends[1]]
        (x1, y1), (x2, y2) = xy(a), xy(b)
        colour = "#d62728" if e.id in highlighted else "#333"
        width = 2.5 if e.id in highlighted else 1.0
        out.append(
            f'<line x1="{x1:.3f}" y1="{y1:.3f}" x2="{x2:.3f}" y2="{y2:.3f}" '
            f'stroke="{colour}" stroke-width="{width}"/>'
        )
    for v in graph.vertices:
        x, y = xy(coords[v.id])
        fill = "#1f77b4" if v.id in wedge else "#000"
        out.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="2.5" fill="{fill}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def rotate_region(graph: TilingGraph, region: BoundaryRegion, shift: int) -> BoundaryRegion:
    return BoundaryRegion((region.start + shift) % region.n, region.length, region.n)


def vertices_of(graph: TilingGraph, ids: Iterable[int]) -> list[Vertex]:
    return [graph.vertices[i] for i in ids]
