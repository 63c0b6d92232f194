"""Global boundary states of HIT networks on tiling patches.

The state of a whole patch is obtained by walking epsilon chains: inside a
vertex a strand follows its arc, across an edge it continues on the slot
given by the spec's ``tau`` (times the edge holonomy, if any).  Chains that
end on two boundary slots become boundary pairs; closed chains contribute
their trace to the scalar prefactor.  Any internal edge can be left *open*,
which exposes its two sides as extra slots; operator insertions on edges are
evaluated that way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._parallel import pmap
from .hit import HitSpec, edge_tensor
from .su2kit import random_su2
from .tensorcore import (
    DenseTensor,
    Leg,
    PairingState,
    contract,
    pairing_reduced_density,
)
from .tiling import BoundaryRegion, TilingGraph, graph_length, minimal_cut

TOL = 1e-9


@dataclass(frozen=True, eq=False)
class NetworkState:
    graph: TilingGraph
    spec: HitSpec
    pairing: PairingState  # over boundary slots, position * k + slot
    holonomies: dict = field(default_factory=dict)  # edge id -> 2x2 per-slot matrix
    loops: int = 0

    @property
    def k(self) -> int:
        return self.spec.k

    def leg_slots(self, position: int) -> list[int]:
        k = self.k
        return [position * k + s for s in range(k)]

    def region_slots(self, region: BoundaryRegion) -> list[int]:
        return [s for p in region.positions for s in self.leg_slots(p)]


def random_holonomies(graph: TilingGraph, seed: int) -> dict[int, np.ndarray]:
    rng = np.random.default_rng(seed)
    return {e.id: random_su2(rng) for e in graph.internal_edges()}


def _walk(
    graph: TilingGraph,
    spec: HitSpec,
    holonomies: dict | None = None,
    open_edges: Sequence[int] = (),
) -> tuple[PairingState, int]:
    """Chain-walking contraction.  Terminal slots: boundary legs first
    (position * k + s), then for each open edge its ends[0] side and ends[1]
    side (k slots each, in the frame of the respective vertex)."""
    if spec.q != graph.q:
        raise ValueError(f"spec valence {spec.q} does not match tiling q={graph.q}")
    if not spec.is_pairing:
        raise ValueError("chain walking needs a pairing spec")
    k, q = spec.k, graph.q
    tau = spec.tau
    holonomies = holonomies or {}
    nb = graph.n_boundary
    open_index = {e: t for t, e in enumerate(open_edges)}
    for e in open_edges:
        if graph.edges[e].is_boundary:
            raise ValueError("only internal edges can be opened")

    eps = np.array([[0, 1j], [-1j, 0]], dtype=complex)
    arc: dict[tuple[int, int], tuple[tuple[int, int], np.ndarray]] = {}
    for a, b in spec.pairs:
        arc[a] = (b, eps)
        arc[b] = (a, eps.T)
    bpos = {e: i for i, e in enumerate(graph.boundary)}
    eye = np.eye(2, dtype=complex)

    def terminal(v: int, i: int, s: int) -> int | None:
        e = graph.vertices[v].edges[i]
        edge = graph.edges[e]
        if edge.is_boundary:
            return bpos[e] * k + s
        if e in open_index:
            side = 0 if edge.ends[0] == v else 1
            return nb * k + open_index[e] * 2 * k + side * k + s
        return None

    def cross(v: int, i: int, s: int):
        e = graph.vertices[v].edges[i]
        edge = graph.edges[e]
        u, w = edge.ends
        g = holonomies.get(e, eye)
        if v == u:
            return (w, graph.slot_of(w, e), tau[s]), g
        return (u, graph.slot_of(u, e), tau[s]), g.T

    starts: list[tuple[int, tuple[int, int, int]]] = []
    for v in graph.vertices:
        for i in range(q):
            for s in range(k):
                t = terminal(v.id, i, s)
                if t is not None:
                    starts.append((t, (v.id, i, s)))
    starts.sort()

    visited: set[tuple[int, int, int]] = set()
    pairs, mats = [], []
    for t0, node in starts:
        if node in visited:
            continue
        M = eye.copy()
        while True:
            visited.add(node)
            v, i, s = node
            (i2, s2), E = arc[(i, s)]
            M = M @ E
            node = (v, i2, s2)
            visited.add(node)
            t1 = terminal(*node)
            if t1 is not None:
                break
            node, L = cross(*node)
            M = M @ L
        pairs.append((t0, t1))
        mats.append(M)

    scalar = 1.0 + 0j
    loops = 0
    for v in graph.vertices:
        for i in range(q):
            for s in range(k):
                start = (v.id, i, s)
                if start in visited:
                    continue
                M = eye.copy()
                node = start
                while True:
                    visited.add(node)
                    vv, ii, ss = node
                    (i2, s2), E = arc[(ii, ss)]
                    M = M @ E
                    node = (vv, i2, s2)
                    visited.add(node)
                    node, L = cross(*node)
                    M = M @ L
                    if node == start:
                        break
                scalar *= np.trace(M)
                loops += 1
    n_slots = (nb + 2 * len(open_edges)) * k
    perms = {str(e.id): list(spec.B) for e in graph.internal_edges()}
    return PairingState(n_slots, tuple(pairs), tuple(mats), scalar, perms), loops


def assemble(graph: TilingGraph, spec: HitSpec, holonomies: dict | None = None) -> NetworkState:
    """Boundary state of the patch as an exact pairing."""
    pairing, loops = _walk(graph, spec, holonomies)
    return NetworkState(graph, spec, pairing, dict(holonomies or {}), loops)


def dense_boundary_state(
    graph: TilingGraph,
    spec: HitSpec,
    holonomies: dict | None = None,
    edge_ops: dict | None = None,
) -> np.ndarray:
    """Brute-force contraction of every vertex and edge tensor.

    ``edge_ops`` maps an internal edge id to an operator on its k slots,
    applied on the ends[0] side.  Returns the boundary vector in boundary
    slot order.
    """
    holonomies = holonomies or {}
    edge_ops = edge_ops or {}
    A = spec.tensor()
    tensors, plan = [], []
    for v in graph.vertices:
        mapping = {}
        for i, e in enumerate(v.edges):
            mapping[i] = ("leg", e) if graph.edges[e].is_boundary else ("half", e, v.id)
        tensors.append(A.relabel(mapping))
    for e in graph.internal_edges():
        u, w = e.ends
        B = edge_tensor(spec, (("bu", e.id), ("bw", e.id)), holonomies.get(e.id))
        if e.id in edge_ops:
            B = DenseTensor(B.legs, np.asarray(edge_ops[e.id]) @ B.data)
        tensors.append(B)
        plan += [(("half", e.id, u), ("bu", e.id)), (("half", e.id, w), ("bw", e.id))]
    out = contract(tensors, plan)
    out = out.transpose_legs([("leg", e) for e in graph.boundary])
    return out.vector()


def _connector(spec: HitSpec, op: np.ndarray | None, g: np.ndarray | None) -> np.ndarray:
    """Vector over (ends[0] side, ends[1] side) slots that closes an open edge."""
    B = edge_tensor(spec, ("x", "y"), g).data
    if op is not None:
        B = np.asarray(op) @ B
    return B.reshape(-1)


def _opened_marginal(state: NetworkState, open_edges: list[int], positions: list[int]) -> np.ndarray:
    """Marginal over the open-edge sides and the listed boundary legs,
    shaped (x, y, x', y')."""
    graph, spec, k = state.graph, state.spec, state.k
    nb = graph.n_boundary
    for p in positions:
        if not 0 <= p < nb:
            raise ValueError(f"boundary position {p} out of range")
    if open_edges:
        pairing, _ = _walk(graph, spec, state.holonomies, open_edges)
    else:
        pairing = state.pairing
    x_slots = [nb * k + t for t in range(2 * k * len(open_edges))]
    y_slots = [p * k + s for p in positions for s in range(k)]
    rho = pairing_reduced_density(pairing, x_slots + y_slots)
    dx, dy = 2 ** len(x_slots), 2 ** len(y_slots)
    return rho.reshape(dx, dy, dx, dy)


def _evaluate(state: NetworkState, rho: np.ndarray, open_edges, edge_ops: dict, positions, leg_ops: dict) -> complex:
    spec = state.spec
    c_ket = np.ones(1, dtype=complex)
    c_bra = np.ones(1, dtype=complex)
    for e in open_edges:
        g = state.holonomies.get(e)
        c_ket = np.kron(c_ket, _connector(spec, edge_ops[e], g))
        c_bra = np.kron(c_bra, _connector(spec, None, g))
    O = np.ones((1, 1), dtype=complex)
    for p in positions:
        O = np.kron(O, np.asarray(leg_ops[p]))
    num = np.einsum("a,aybz,b,zy->", c_ket, rho, c_bra.conj(), O)
    den = np.einsum("a,ayby,b->", c_bra, rho, c_bra.conj())
    return complex(num / den)


def insertion_expectation(
    state: NetworkState,
    edge_ops: dict | None = None,
    leg_ops: dict | None = None,
) -> complex:
    """<psi| prod O |psi> / <psi|psi> for operators on internal edges and boundary legs.

    ``edge_ops``: internal edge id -> operator (k slots, ends[0] side frame).
    ``leg_ops``: boundary position -> operator on that leg's k slots.
    """
    edge_ops = dict(edge_ops or {})
    leg_ops = dict(leg_ops or {})
    open_edges, positions = sorted(edge_ops), sorted(leg_ops)
    rho = _opened_marginal(state, open_edges, positions)
    return _evaluate(state, rho, open_edges, edge_ops, positions, leg_ops)


def insertion_table(state: NetworkState, sites: Sequence[tuple[str, int]], ops: Sequence) -> np.ndarray:
    """Expectations of every product of ops[i][a_i] placed on sites[i].

    Sites are ("edge", id) or ("leg", position) and must be distinct; the
    opened marginal is built once for the whole table.
    """
    if len(set(sites)) != len(sites):
        raise ValueError("sites must be distinct")
    open_edges = sorted(x for kind, x in sites if kind == "edge")
    positions = sorted(x for kind, x in sites if kind == "leg")
    rho = _opened_marginal(state, open_edges, positions)
    out = np.zeros([len(o) for o in ops], dtype=complex)
    for idx in np.ndindex(*out.shape):
        edge_ops, leg_ops = {}, {}
        for (kind, x), lst, i in zip(sites, ops, idx):
            (edge_ops if kind == "edge" else leg_ops)[x] = lst[i]
        out[idx] = _evaluate(state, rho, open_edges, edge_ops, positions, leg_ops)
    return out


def boundary_entropy(state: NetworkState, region: BoundaryRegion) -> float:
    return state.pairing.entropy(state.region_slots(region))


@dataclass(frozen=True)
class RTFit:
    slope: float
    intercept: float
    max_residual: float
    rows: tuple  # (start, length, S, L)


def rt_fit(state: NetworkState, regions: Sequence[BoundaryRegion]) -> RTFit:
    """Least-squares line S = slope * L + intercept over the given regions."""
    if len(regions) < 2:
        raise ValueError("at least two regions are needed for a fit")

    def row(r: BoundaryRegion):
        return (r.start, r.length, boundary_entropy(state, r), graph_length(minimal_cut(state.graph, r)))

    rows = pmap(row, regions)
    L = np.array([r[3] for r in rows], dtype=float)
    S = np.array([r[2] for r in rows], dtype=float)
    if np.ptp(L) == 0:
        raise ValueError("degenerate fit: all regions have the same graph length")
    slope, intercept = np.polyfit(L, S, 1)
    resid = S - (slope * L + intercept)
    return RTFit(float(slope), float(intercept), float(np.abs(resid).max()), tuple(rows))


def two_point_correlator(
    state: NetworkState, obs1: np.ndarray, site1: int, obs2: np.ndarray, site2: int
) -> complex:
    """<O1 O2> on two boundary legs (positions in boundary order)."""
    d = 2**state.k
    for o in (obs1, obs2):
        if np.shape(o) != (d, d):
            raise ValueError(f"observables must be {d}x{d}")
    n = state.graph.n_boundary
    for s in (site1, site2):
        if not 0 <= s < n:
            raise ValueError(f"site {s} out of range")
    if site1 == site2:
        return insertion_expectation(state, leg_ops={site1: np.asarray(obs1) @ np.asarray(obs2)})
    return insertion_expectation(state, leg_ops={site1: obs1, site2: obs2})


@dataclass(frozen=True)
class CorrelationBudget:
    k: float
    k_direct: float
    m_max: float
    k_saturating: float
    k_saturating_direct: float
    j_max: int
    linear_in_n: bool


def correlation_k_budget(n: int, xi: float, m: float) -> CorrelationBudget:
    """Bell pairs per site needed for correlations decaying as exp(-j/xi)."""
    if xi <= 0:
        raise ValueError("xi must be positive")
    if n <= 0 or n % 2:
        raise ValueError("n must be a positive even integer")
    if m < 1:
        raise ValueError("m must be at least 1")
    half = n // 2
    k_closed = 2 * m * (-math.expm1(-half / xi)) / math.expm1(1 / xi)
    k_direct = 2 * m * math.fsum(math.exp(-j / xi) for j in range(1, half + 1))
    m_max = math.exp(half / xi)
    k_sat = 2 * math.expm1(half / xi) / math.expm1(1 / xi)
    k_sat_direct = 2 * m_max * math.fsum(math.exp(-j / xi) for j in range(1, half + 1))
    j_max = int(math.floor(xi * math.log(m) + 1e-12))
    return CorrelationBudget(k_closed, k_direct, m_max, k_sat, k_sat_direct, j_max, True)
