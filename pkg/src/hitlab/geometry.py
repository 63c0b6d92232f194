"""Length, area and angle observables on HIT states.

Length follows the convention in which each edge contributes
sqrt(j(j+1)) * <P^j>^2, so that ell_j = sqrt(j(j+1)) * w_j**2 with
w_j = <A|P^j_leg|A> / <A|A>.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .hit import HitSpec
from .network import NetworkState, insertion_expectation, insertion_table
from .su2kit import (
    SpinLabel,
    apply_slot_op,
    embed_on,
    spin_matrices,
    spin_projectors,
    symmetrizer,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
)
from .tensorcore import PairingState, pairing_to_dense, reduced_density
from .tiling import Cut, TilingGraph

TOL = 1e-9


def _root_casimir(j: Fraction) -> float:
    return math.sqrt(float(j * (j + 1)))


@dataclass
class LengthReport:
    per_j: dict  # Fraction j -> ell_j
    c_A: float
    graph_length: int = 1
    expectation: float = 0.0
    variance: float = 0.0
    method: str = "formula"

    def to_json(self) -> dict:
        return {
            "per_j": {str(j): v for j, v in self.per_j.items()},
            "c_A": self.c_A,
            "graph_length": self.graph_length,
            "expectation": self.expectation,
            "variance": self.variance,
            "method": self.method,
        }


def spin_weights(rho: np.ndarray, k: int) -> dict:
    """w_j = tr(rho P^j) for a k-slot leg marginal."""
    ps = spin_projectors(k)
    return {lab.j: float(np.trace(rho @ P).real) for lab, _, P in ps.entries}


def length_contribution(spec: HitSpec, leg: int = 0) -> LengthReport:
    """Per-spin constants ell_j of a single vertex tensor."""
    if spec.k == 0:
        return LengthReport({}, 0.0)
    rho = reduced_density(spec.tensor(), [leg])
    w = spin_weights(rho, spec.k)
    per_j = {j: _root_casimir(j) * wj**2 for j, wj in w.items()}
    c_A = math.fsum(per_j.values())
    var = math.fsum(l * (_root_casimir(j) - c_A) for j, l in per_j.items())
    return LengthReport(per_j, c_A, 1, c_A, var)


def _cut_sites(state: NetworkState, cut: Cut) -> list[tuple[str, int]]:
    g = state.graph
    bpos = {e: i for i, e in enumerate(g.boundary)}
    out = []
    for e in sorted(cut.edges):
        out.append(("leg", bpos[e]) if g.edges[e].is_boundary else ("edge", e))
    return out


def _insert(state: NetworkState, ops: Sequence[tuple[tuple[str, int], np.ndarray]]) -> complex:
    edge_ops, leg_ops = {}, {}
    for (kind, x), op in ops:
        target = edge_ops if kind == "edge" else leg_ops
        target[x] = target[x] @ op if x in target else op
    return insertion_expectation(state, edge_ops, leg_ops)


def edge_spin_weights(state: NetworkState, site: tuple[str, int]) -> dict:
    ps = spin_projectors(state.k)
    return {lab.j: float(_insert(state, [(site, P)]).real) for lab, _, P in ps.entries}


def length_expectation(state: NetworkState, cut: Cut, method: str = "formula") -> LengthReport:
    """<L_gamma> on the cut.  ``formula`` uses c_A * L; ``insertion`` inserts
    spin projectors on every cut edge of the actual network state."""
    base = length_contribution(state.spec)
    L = len(cut.edges)
    if method == "formula":
        return LengthReport(base.per_j, base.c_A, L, base.c_A * L, base.variance * L, method)
    if method != "insertion":
        raise ValueError("method must be 'formula' or 'insertion'")
    total = 0.0
    for site in _cut_sites(state, cut):
        w = edge_spin_weights(state, site)
        total += math.fsum(_root_casimir(j) * wj**2 for j, wj in w.items())
    second = length_second_moment(state, cut)
    return LengthReport(base.per_j, base.c_A, L, total, second - total**2, method)


def length_second_moment(state: NetworkState, cut: Cut) -> float:
    """Sum over ordered cut-edge pairs of sqrt(j(j+1)) sqrt(k(k+1)) <P^j_e P^k_e'>^2."""
    ps = spin_projectors(state.k)
    js = [lab.j for lab, _, _ in ps.entries]
    Ps = [P for _, _, P in ps.entries]
    root = np.array([_root_casimir(j) for j in js])
    sites = _cut_sites(state, cut)
    total = 0.0
    for a, site in enumerate(sites):
        w = insertion_table(state, [site], [Ps]).real
        total += float(np.sum(root**2 * w**2))
        for b in range(a + 1, len(sites)):
            t = insertion_table(state, [site, sites[b]], [Ps, Ps]).real
            total += 2 * float(root @ (t**2) @ root)
    return total


def length_variance(state: NetworkState, cut: Cut, strip: frozenset = frozenset()) -> float:
    """Var(L_gamma).  Strip-free cuts use the closed formula; otherwise the
    second moment is evaluated on the network state directly."""
    if not strip:
        base = length_contribution(state.spec)
        return base.variance * len(cut.edges)
    rep = length_expectation(state, cut, method="insertion")
    return rep.variance


# --------------------------------------------------------------------- area


def area_squared(j, k, l) -> float:
    D = [-float(Fraction(x) * (Fraction(x) + 1)) for x in (j, k, l)]
    return 9 / 4 * (2 * (D[0] * D[1] + D[0] * D[2] + D[1] * D[2]) - sum(d * d for d in D)) - 0.5 * sum(D)


def admissible(j, k, l) -> bool:
    j, k, l = (Fraction(x) for x in (j, k, l))
    return abs(j - k) <= l <= j + k and (j + k + l).denominator == 1


def area_eigenvalue(j, k, l) -> float:
    """Eigenvalue of the vertex area operator on the (j, k, l) intertwiner."""
    if not admissible(j, k, l):
        raise ValueError(f"({j}, {k}, {l}) is not triangle-admissible")
    s2 = area_squared(j, k, l)
    if s2 < -1e-12:
        raise ValueError(f"negative squared area {s2} for ({j}, {k}, {l})")
    return math.sqrt(max(s2, 0.0))


_LEVI = np.zeros((3, 3, 3))
for _p in itertools.permutations(range(3)):
    _LEVI[_p] = np.linalg.det(np.eye(3)[list(_p)])


def grasp_area_oracle(labels) -> float:
    """sqrt of S_v^2 built from generator insertions on the unique intertwiner.

    S_v^2 = sum_c K^c K^c with K^c = sum over unordered leg pairs of
    sgn(e1, e2) eps_abc X^a(e1) X^b(e2); sgn is +1 when e2 follows e1
    counterclockwise.  Two-valent vertices (a zero label) reduce to j(j+1).
    """
    js = [Fraction(x) for x in labels]
    mats = [spin_matrices(j) for j in js]
    dims = [m[0].shape[0] for m in mats]
    n = len(js)

    def on(e: int, a: int) -> np.ndarray:
        out = np.ones((1, 1), dtype=complex)
        for t, d in enumerate(dims):
            out = np.kron(out, mats[t][a] if t == e else np.eye(d))
        return out

    X = [[on(e, a) for a in range(3)] for e in range(n)]
    total = [sum(X[e][a] for e in range(n)) for a in range(3)]
    cas = sum(t @ t for t in total)
    w, v = np.linalg.eigh(cas)
    inv = v[:, np.abs(w) < 1e-9]
    if inv.shape[1] != 1:
        raise ValueError(f"labels {labels} do not carry a unique intertwiner")
    psi = inv[:, 0]
    K = []
    for c in range(3):
        op = 0
        for e1, e2 in itertools.combinations(range(n), 2):
            sgn = 1.0 if (e2 - e1) % n == 1 else -1.0
            for a in range(3):
                for b in range(3):
                    if _LEVI[a, b, c]:
                        op = op + sgn * _LEVI[a, b, c] * X[e1][a] @ X[e2][b]
        K.append(op)
    S2 = sum(k @ k for k in K)
    val = np.vdot(psi, S2 @ psi).real
    return math.sqrt(max(val, 0.0))


@dataclass
class SpinBasisDecomposition:
    basis: list  # (labels, norm, unnormalized vector)
    coeffs: dict = field(default_factory=dict)  # labels -> complex
    norm_A: float = 0.0

    def weights(self) -> dict:
        out: dict = {}
        for lab, c in self.coeffs.items():
            out[lab] = out.get(lab, 0.0) + abs(c) ** 2
        return out


def _exact_basis_q3k2() -> list:
    """The five drawn basis diagrams, arcs oriented against the HIT arcs."""

    def arcs(pairs):
        return pairing_to_dense(PairingState(6, tuple(pairs)))

    S = symmetrizer(2)

    def sym(legs):
        op = np.eye(64, dtype=complex)
        for l in legs:
            op = op @ embed_on(S, [2 * l, 2 * l + 1], 6)
        return op

    out = [((0, 0, 0), arcs([(1, 0), (3, 2), (5, 4)]))]
    for z in range(3):
        a, b = (z + 1) % 3, (z + 2) % 3  # b follows a counterclockwise
        v = arcs([(2 * z + 1, 2 * z), (2 * b + 1, 2 * a), (2 * b, 2 * a + 1)])
        lab = tuple(0 if x == z else 1 for x in range(3))
        out.append((lab, sym([a, b]) @ v))
    hit_arcs = arcs([(2 * ((i + 1) % 3) + 1, 2 * i) for i in range(3)])
    out.append(((1, 1, 1), sym([0, 1, 2]) @ hit_arcs))
    out.sort(key=lambda t: t[0])
    return [(lab, float(np.linalg.norm(v)), v) for lab, v in out]


def _generic_basis(q: int, k: int, limit: int = 14) -> list:
    """Invariant basis labeled by leg spins, from projector ranges and the
    kernel of the total Casimir inside each label block."""
    if q * k > limit:
        raise ValueError(f"q*k = {q * k} exceeds the generic-basis limit {limit}")
    ps = spin_projectors(k)
    ranges = {}
    for lab, _, P in ps.entries:
        w, v = np.linalg.eigh(P)
        ranges[lab.j] = v[:, w > 0.5]
    n = q * k
    out = []
    for labels in itertools.product(sorted(ranges), repeat=q):
        V = np.ones((1, 1), dtype=complex)
        for j in labels:
            V = np.kron(V, ranges[j])
        if V.shape[1] == 0:
            continue
        # Casimir restricted to the block
        JV = [np.zeros_like(V) for _ in range(3)]
        for col in range(V.shape[1]):
            for a, s in enumerate((PAULI_X, PAULI_Y, PAULI_Z)):
                JV[a][:, col] = sum(apply_slot_op(s / 2, V[:, col], slot, n) for slot in range(n))
        C = sum(J.conj().T @ J for J in JV)
        w, u = np.linalg.eigh((C + C.conj().T) / 2)
        null = u[:, np.abs(w) < 1e-8]
        for i in range(null.shape[1]):
            vec = V @ null[:, i]
            out.append((tuple(labels), 1.0, vec / np.linalg.norm(vec)))
    return out


def spin_basis(q: int, k: int, exact: bool = True) -> SpinBasisDecomposition:
    if exact and (q, k) == (3, 2):
        return SpinBasisDecomposition(_exact_basis_q3k2())
    return SpinBasisDecomposition(_generic_basis(q, k))


def decompose_vertex(spec: HitSpec, exact: bool = True) -> SpinBasisDecomposition:
    A = spec.tensor().vector()
    nA = float(np.linalg.norm(A))
    dec = spin_basis(spec.q, spec.k, exact)
    coeffs = {}
    for i, (lab, nrm, vec) in enumerate(dec.basis):
        key = lab if lab not in coeffs else lab + (i,)
        coeffs[key] = complex(np.vdot(vec, A) / (nrm * nA))
    dec.coeffs = coeffs
    dec.norm_A = nA
    return dec


@dataclass
class AreaReport:
    coeffs: dict
    eigenvalues: dict
    vertex_area: float
    printed_value: float | None = None
    flag: str = ""

    def to_json(self) -> dict:
        return {
            "coeffs": {"".join(str(x) for x in k): [c.real, c.imag] for k, c in self.coeffs.items()},
            "weights": {"".join(str(x) for x in k): abs(c) ** 2 for k, c in self.coeffs.items()},
            "eigenvalues": {"".join(str(x) for x in k): v for k, v in self.eigenvalues.items()},
            "vertex_area": self.vertex_area,
            "printed_value": self.printed_value,
            "flag": self.flag,
        }


PRINTED_73_AREA = 3 / 16 * math.sqrt(2) + 3 / 8 * math.sqrt(30)


def vertex_area(spec: HitSpec) -> AreaReport:
    """<S_v> = sum |c|^2 s over the spin decomposition of the vertex tensor.

    Legs of spin j carry the eigenvalue of a single three-valent intertwiner;
    only three-valent vertices are supported.
    """
    if spec.q != 3:
        raise ValueError("vertex_area supports three-valent vertices")
    dec = decompose_vertex(spec)
    eig = {}
    total = 0.0
    for lab, c in dec.coeffs.items():
        js = lab[:3]
        eig[lab] = area_eigenvalue(*js)
        total += abs(c) ** 2 * eig[lab]
    rep = AreaReport(dec.coeffs, eig, total)
    if spec.family == "left_right":
        rep.printed_value = PRINTED_73_AREA
        if abs(total - PRINTED_73_AREA) > TOL:
            rep.flag = (
                "computed sum of |c|^2 s differs from the printed (3/16)sqrt2 + (3/8)sqrt30;"
                " the three spin-(0,1,1) labels each contribute (3/16)sqrt2"
            )
    return rep


def surface_area(spec: HitSpec, n_vertices: int) -> float:
    return n_vertices * vertex_area(spec).vertex_area


# -------------------------------------------------------------------- angle


def _leg_spin_images(spec: HitSpec, leg: int) -> list[np.ndarray]:
    A = spec.tensor().vector()
    A = A / np.linalg.norm(A)
    n = spec.q * spec.k
    slots = range(leg * spec.k, (leg + 1) * spec.k)
    return [sum(apply_slot_op(s / 2, A, slot, n) for slot in slots) for s in (PAULI_X, PAULI_Y, PAULI_Z)]


@dataclass
class AngleReport:
    cos_theta: float
    theta: float
    alpha: float

    def to_json(self) -> dict:
        return {"cos_theta": self.cos_theta, "theta": self.theta, "alpha": self.alpha}


def vertex_angle(spec: HitSpec, e1: int, e2: int) -> AngleReport:
    """Angle between the grasped tangent vectors X(e1) A and X(e2) A."""
    if spec.q < 3:
        raise ValueError("angles need valence at least 3")
    X1, X2 = _leg_spin_images(spec, e1), _leg_spin_images(spec, e2)
    inner = sum(np.vdot(a, b) for a, b in zip(X1, X2))
    n1 = math.sqrt(sum(np.vdot(a, a).real for a in X1))
    n2 = math.sqrt(sum(np.vdot(b, b).real for b in X2))
    cos = float((inner / (n1 * n2)).real)
    cos = max(-1.0, min(1.0, cos))
    theta = math.acos(cos)
    return AngleReport(cos, theta, math.pi - theta)


@dataclass(frozen=True)
class AngleSum:
    total: float
    deficit: float
    n_corners: int
    units: int  # total in multiples of alpha


def polygon_angle_sum(alpha: float, pattern: Sequence[int]) -> AngleSum:
    """Angle sum of an n-gon whose corners collect ``pattern[i]`` copies of alpha."""
    n = len(pattern)
    if n < 3:
        raise ValueError("a polygon needs at least three corners")
    units = int(sum(pattern))
    total = units * alpha
    return AngleSum(total, (n - 2) * math.pi - total, n, units)


def dual_polygon_pattern(graph: TilingGraph) -> list[int]:
    """Corner multiplicities of the polygon formed by the patch's dual triangles."""
    return list(graph.outer_faces)
