"""Hyperinvariant SU(2)-invariant tensors built from epsilon pairs, and their verifiers.

Slot conventions
----------------
A vertex tensor has q legs of k qubit slots each; global slot ``leg * k + s``.
``pairs`` lists the epsilon arcs ((leg, slot), (leg, slot)) inside the vertex.
``mirror`` is the involution on the k slots that describes how a strand
continues straight through an edge, and ``B`` is the edge permutation in the
leg frame.  Across an edge, slot s on one side meets slot ``mirror[B[s]]`` on
the other.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .su2kit import apply_total_spin, random_su2
from .tensorcore import DenseTensor, Leg, PairingState, contract, pairing_to_dense, reduced_density

TOL = 1e-9
Slot = tuple[int, int]


@dataclass(frozen=True, eq=False)
class HitSpec:
    q: int
    k: int
    family: str
    pairs: tuple[tuple[Slot, Slot], ...] = ()
    mirror: tuple[int, ...] = ()
    B: tuple[int, ...] = ()
    params: dict = field(default_factory=dict)
    factors: tuple["HitSpec", ...] = ()
    custom: DenseTensor | None = None

    def __post_init__(self):
        if self.q < 1 or self.k < 0:
            raise ValueError("invalid valence or slot count")
        if not self.mirror:
            object.__setattr__(self, "mirror", tuple(range(self.k - 1, -1, -1)))
        if not self.B:
            object.__setattr__(self, "B", tuple(range(self.k)))
        for name, perm in (("B", self.B), ("mirror", self.mirror)):
            if sorted(perm) != list(range(self.k)):
                raise ValueError(f"{name} must be a bijection on {self.k} slots")
        if self.custom is None:
            used = sorted(s for p in self.pairs for s in p)
            if used != [(i, s) for i in range(self.q) for s in range(self.k)]:
                raise ValueError("pairs must match every slot exactly once")

    @property
    def is_pairing(self) -> bool:
        return self.custom is None

    @property
    def tau(self) -> tuple[int, ...]:
        """Slot identification across an edge."""
        return tuple(self.mirror[self.B[s]] for s in range(self.k))

    def with_B(self, B: Sequence[int]) -> "HitSpec":
        return HitSpec(self.q, self.k, self.family, self.pairs, self.mirror, tuple(B),
                       dict(self.params), self.factors, self.custom)

    def pairing(self) -> PairingState:
        k = self.k
        return PairingState(
            self.q * k, tuple((a[0] * k + a[1], b[0] * k + b[1]) for a, b in self.pairs)
        )

    def tensor(self) -> DenseTensor:
        """Unnormalized vertex tensor with legs 0..q-1."""
        if self.custom is not None:
            return self.custom
        return DenseTensor.from_vector(pairing_to_dense(self.pairing()), [self.k] * self.q)

    def to_json(self) -> dict:
        fam: dict = {"name": self.family}
        if self.family == "l_shift":
            fam["shifts"] = list(self.params["shifts"])
        if self.family == "tensor_product":
            fam["factors"] = [f.to_json() for f in self.factors]
        if self.family == "custom":
            fam["tensor"] = self.custom.to_json()
        return {"q": self.q, "k": self.k, "family": fam, "B": list(self.B)}

    @classmethod
    def from_json(cls, data: dict) -> "HitSpec":
        q, fam = int(data["q"]), data["family"]
        name = fam if isinstance(fam, str) else fam["name"]
        if name == "star":
            spec = make_star(q, int(data.get("k", 1)))
        elif name == "left_right":
            spec = make_left_right(q)
        elif name == "l_shift":
            spec = make_l_shift(q, fam["shifts"])
        elif name == "tensor_product":
            fs = [cls.from_json(f) for f in fam["factors"]]
            spec = fs[0]
            for f in fs[1:]:
                spec = hit_tensor_product(spec, f)
        elif name == "custom":
            spec = make_custom(DenseTensor.from_json(fam["tensor"]))
        else:
            raise ValueError(f"unknown family {name!r}")
        if "B" in data and data["B"] is not None:
            spec = spec.with_B(data["B"])
        if int(data.get("k", spec.k)) != spec.k:
            raise ValueError(f"k={data['k']} disagrees with family slot count {spec.k}")
        return spec


def make_star(q: int, k: int = 1) -> HitSpec:
    """Slot s of leg i paired with slot s of the opposite leg."""
    if q % 2:
        raise ValueError("the star family needs even valence")
    if k < 1:
        raise ValueError("k must be positive")
    h = q // 2
    pairs = tuple(((i, s), (i + h, s)) for i in range(h) for s in range(k))
    return HitSpec(q, k, "star", pairs, params={"k": k})


def make_l_shift(q: int, shifts: Sequence[int]) -> HitSpec:
    """Bell pairs between each leg and its l-th neighbour, for every l in ``shifts``.

    A shift l < q/2 uses two slots per leg: a counterclockwise-going slot t and
    a clockwise-going slot k-1-t.  A shift l = q/2 uses one middle slot.
    """
    shifts = list(shifts)
    if not shifts or len(set(shifts)) != len(shifts):
        raise ValueError("shifts must be distinct and non-empty")
    for l in shifts:
        if not 1 <= l <= q // 2:
            raise ValueError(f"shift {l} outside 1..{q // 2}")
    if q < 2:
        raise ValueError("valence too small")
    half = [l for l in shifts if 2 * l == q]
    wide = [l for l in shifts if 2 * l < q]
    k = 2 * len(wide) + len(half)
    pairs = []
    for t, l in enumerate(wide):
        for i in range(q):
            pairs.append(((i, t), ((i + l) % q, k - 1 - t)))
    if half:
        m = len(wide)
        for i in range(q // 2):
            pairs.append(((i, m), (i + q // 2, m)))
    B = list(range(k))
    if 1 in wide:
        t = wide.index(1)
        B[t], B[k - 1 - t] = k - 1 - t, t
    return HitSpec(q, k, "l_shift", tuple(pairs), B=tuple(B), params={"shifts": tuple(shifts)})


def make_left_right(q: int) -> HitSpec:
    """Neighbouring legs joined by one pair each; k = 2 and B swaps the slots."""
    if q < 3:
        raise ValueError("left_right needs q >= 3")
    s = make_l_shift(q, [1])
    return HitSpec(q, 2, "left_right", s.pairs, s.mirror, s.B)


def make_custom(tensor: DenseTensor, B: Sequence[int] | None = None) -> HitSpec:
    ks = {l.k for l in tensor.legs}
    if len(ks) != 1:
        raise ValueError("all legs of a custom tensor need the same slot count")
    k = ks.pop()
    return HitSpec(len(tensor.legs), k, "custom", B=tuple(B) if B else (), custom=tensor)


def hit_tensor_product(a: HitSpec, b: HitSpec) -> HitSpec:
    """Slot-disjoint union: a's slots come first on every leg."""
    if a.q != b.q:
        raise ValueError("valence mismatch")
    if not (a.is_pairing and b.is_pairing):
        raise ValueError("tensor products are defined for pairing families")
    if b.k == 0:
        return a
    if a.k == 0:
        return b
    off = a.k
    pairs = a.pairs + tuple(((x[0], x[1] + off), (y[0], y[1] + off)) for x, y in b.pairs)
    mirror = a.mirror + tuple(m + off for m in b.mirror)
    B = a.B + tuple(x + off for x in b.B)
    flat = (a.factors or (a,)) + (b.factors or (b,))
    return HitSpec(a.q, a.k + b.k, "tensor_product", pairs, mirror, B, factors=flat)


def trivial(q: int) -> HitSpec:
    return HitSpec(q, 0, "trivial", ())


# ------------------------------------------------------------------- reports


@dataclass
class VerificationReport:
    checks: dict = field(default_factory=dict)  # name -> (passed, residual)

    def add(self, name: str, residual: float, tol: float = TOL, expect_zero: bool = True):
        ok = residual <= tol if expect_zero else residual > tol
        self.checks[name] = (bool(ok), float(residual))

    @property
    def passed(self) -> bool:
        return all(ok for ok, _ in self.checks.values())

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "checks": {k: {"passed": ok, "residual": r} for k, (ok, r) in self.checks.items()},
        }


def rotate_legs(t: DenseTensor, shift: int = 1) -> DenseTensor:
    """Move the content of leg i to leg i + shift."""
    q = len(t.legs)
    data = np.moveaxis(t.data, list(range(q)), [(i + shift) % q for i in range(q)])
    return DenseTensor(t.legs, data)


def verify_cyclic(spec: HitSpec, tol: float = TOL) -> VerificationReport:
    """Rotation invariance of A, up to a global phase.

    Epsilon arcs are antisymmetric, so rotating a pairing can flip the
    orientation of some arcs; the state, and every observable, is unchanged.
    """
    rep = VerificationReport()
    A = spec.tensor().data
    rot = rotate_legs(spec.tensor()).data
    nrm = np.vdot(A, A).real
    overlap = np.vdot(A, rot)
    phase = overlap / abs(overlap) if abs(overlap) > tol else 1.0
    rep.add("cyclic", float(np.abs(rot - phase * A).max() / np.sqrt(nrm)), tol)
    rep.checks["cyclic_phase"] = (True, float(np.angle(phase)))
    return rep


def verify_invariance(tensor: DenseTensor, generator="SU2", tol: float = TOL) -> VerificationReport:
    """N|psi> = c|psi> for each generator; SU(2) demands c = 0 for all three."""
    rep = VerificationReport()
    psi = tensor.vector()
    psi = psi / np.linalg.norm(psi)
    if generator == "SU2":
        images = dict(zip(("Jx", "Jy", "Jz"), apply_total_spin(psi, tensor.n_slots)))
        demand_zero = True
    else:
        images = {f"N{i}": op @ psi for i, op in enumerate(generator.operators())}
        demand_zero = False
    for name, v in images.items():
        c = np.vdot(psi, v)
        rep.add(name, float(np.linalg.norm(v - c * psi)), tol)
        if demand_zero:
            rep.add(f"{name}_eigenvalue", float(abs(c)), tol)
        else:
            rep.checks[f"{name}_eigenvalue"] = (True, float(c.real))
    return rep


def edge_tensor(spec: HitSpec, ids: tuple, holonomy: np.ndarray | None = None) -> DenseTensor:
    """B as a two-leg tensor: slot s of leg ids[0] meets slot tau(s) of leg ids[1].

    ``holonomy`` is a single-slot matrix g acting on every slot of the first leg.
    """
    k = spec.k
    tau = spec.tau
    g = np.eye(2, dtype=complex) if holonomy is None else np.asarray(holonomy)
    data = np.ones((), dtype=complex)
    for _ in range(k):
        data = np.multiply.outer(data, g)
    # axes now (x_0, y_0, x_1, y_1, ...) with y_s the partner index of slot s
    data = data.reshape((2, 2) * k)
    x_axes = [2 * s for s in range(k)]
    y_axes = [0] * k
    for s in range(k):
        y_axes[tau[s]] = 2 * s + 1
    data = data.transpose(x_axes + y_axes).reshape(2**k, 2**k)

    return DenseTensor((Leg(ids[0], k), Leg(ids[1], k)), data)


def two_vertex_state(
    spec: HitSpec, holonomy: np.ndarray | None = None
) -> tuple[DenseTensor, dict]:
    """A-B-A: vertices u, v joined through leg 0 of each.  Returns the state
    and the distinguished leg pairs (one per face adjacent to the edge)."""
    q = spec.q
    A = spec.tensor()
    Au = A.relabel({i: ("u", i) for i in range(q)})
    Av = A.relabel({i: ("v", i) for i in range(q)})
    Be = edge_tensor(spec, (("e", "u"), ("e", "v")), holonomy)
    state = contract([Au, Be, Av], [(("u", 0), ("e", "u")), (("v", 0), ("e", "v"))])
    faces = {
        "face_ccw": (("u", 1), ("v", q - 1)),
        "face_cw": (("u", q - 1), ("v", 1)),
    }
    return state, faces


def aba_marginal(spec: HitSpec, legs: tuple, holonomy: np.ndarray | None = None) -> np.ndarray:
    """Normalized marginal of the A-B-A state on ((u, i), (v, j)).

    Built from single-vertex marginals joined through B, so the two-vertex
    state is never formed.
    """
    (_, i), (_, j) = legs
    A = spec.tensor()
    d = 2**spec.k
    ru = reduced_density(A, [i, 0], normalize=False).reshape(d, d, d, d)  # a e a' e'
    rv = reduced_density(A, [j, 0], normalize=False).reshape(d, d, d, d)  # b f b' f'
    Bm = edge_tensor(spec, ("x", "y"), holonomy).data
    rho = np.einsum("aexg,ef,gh,bfyh->abxy", ru, Bm, Bm.conj(), rv, optimize=True)
    rho = rho.reshape(d * d, d * d)
    return rho / np.trace(rho).real


def _mixedness(rho: np.ndarray) -> float:
    d = rho.shape[0]
    return float(np.abs(rho - np.eye(d) / d).max())


def verify_isometries(spec: HitSpec, tol: float = TOL, holonomy_seed: int | None = None) -> VerificationReport:
    """The three isometry relations: single A, unitary B, and A-B-A."""
    rep = VerificationReport()
    A = spec.tensor()
    for leg in range(spec.q):
        rep.add(f"A_leg{leg}", _mixedness(reduced_density(A, [leg])), tol)
    Bm = edge_tensor(spec, ("x", "y")).data
    rep.add("B_unitary", float(np.abs(Bm @ Bm.conj().T - np.eye(2**spec.k)).max()), tol)
    tau = spec.tau
    rep.add("tau_involution", float(sum(tau[tau[s]] != s for s in range(spec.k))), 0.5)
    g = None
    if holonomy_seed is not None:
        g = random_su2(np.random.default_rng(holonomy_seed))
    q = spec.q
    if q >= 3:
        faces = {"face_ccw": (("u", 1), ("v", q - 1)), "face_cw": (("u", q - 1), ("v", 1))}
        for name, legs in faces.items():
            rep.add(f"ABA_{name}", _mixedness(aba_marginal(spec, legs, g)), tol)
    return rep


def verify_all(spec: HitSpec, tol: float = TOL) -> VerificationReport:
    rep = VerificationReport()
    for part in (verify_cyclic(spec, tol), verify_invariance(spec.tensor(), "SU2", tol), verify_isometries(spec, tol)):
        rep.checks.update(part.checks)
    return rep


def superpose(a: HitSpec, b: HitSpec, wa: complex = 1.0, wb: complex = 1.0) -> HitSpec:
    """Normalized linear combination of two vertex tensors with equal slot layout."""
    ta, tb = a.tensor(), b.tensor()
    data = wa * ta.data / ta.norm() + wb * tb.data / tb.norm()
    return make_custom(DenseTensor(ta.legs, data), a.B)
