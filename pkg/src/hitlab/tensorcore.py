"""Dense tensors, contraction, marginals, entropies, and the exact pairing engine.

Two engines coexist.  :class:`DenseTensor` is the brute-force path used as an
oracle on small systems.  :class:`PairingState` stores a state that is a
product of two-slot pairs, which covers every Bell-pair network built here,
and answers entropy and norm queries in time linear in the number of slots.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .su2kit import epsilon_pair

DENSE_SLOT_LIMIT = 26
EIG_CUTOFF = 1e-12


@dataclass(frozen=True)
class Leg:
    id: object
    k: int
    dir: str = "out"

    @property
    def dim(self) -> int:
        return 2**self.k


@dataclass(frozen=True, eq=False)
class DenseTensor:
    legs: tuple[Leg, ...]
    data: np.ndarray  # shape (2**k_1, 2**k_2, ...)

    def __post_init__(self):
        ids = [l.id for l in self.legs]
        if len(set(ids)) != len(ids):
            raise ValueError("leg ids must be unique")
        shape = tuple(l.dim for l in self.legs)
        data = np.asarray(self.data, dtype=complex)
        if data.size != int(np.prod(shape, dtype=np.int64)):
            raise ValueError(f"data size {data.size} does not match legs {shape}")
        object.__setattr__(self, "data", data.reshape(shape))

    @classmethod
    def from_vector(cls, vec: np.ndarray, ks: Sequence[int], ids: Sequence | None = None) -> "DenseTensor":
        ids = list(range(len(ks))) if ids is None else list(ids)
        return cls(tuple(Leg(i, k) for i, k in zip(ids, ks)), np.asarray(vec))

    @property
    def leg_ids(self) -> list:
        return [l.id for l in self.legs]

    @property
    def n_slots(self) -> int:
        return sum(l.k for l in self.legs)

    def vector(self) -> np.ndarray:
        return self.data.reshape(-1)

    def leg(self, leg_id) -> Leg:
        return self.legs[self.leg_ids.index(leg_id)]

    def norm(self) -> float:
        return float(np.linalg.norm(self.data))

    def normalized(self) -> "DenseTensor":
        return DenseTensor(self.legs, self.data / self.norm())

    def relabel(self, mapping: dict) -> "DenseTensor":
        return DenseTensor(
            tuple(Leg(mapping.get(l.id, l.id), l.k, l.dir) for l in self.legs), self.data
        )

    def transpose_legs(self, order: Sequence) -> "DenseTensor":
        idx = [self.leg_ids.index(i) for i in order]
        return DenseTensor(tuple(self.legs[i] for i in idx), self.data.transpose(idx))

    def to_json(self) -> dict:
        flat = self.vector()
        return {
            "legs": [{"id": l.id, "k": l.k, "dir": l.dir} for l in self.legs],
            "data": [[float(z.real), float(z.imag)] for z in flat],
        }

    @classmethod
    def from_json(cls, data: dict) -> "DenseTensor":
        legs = tuple(Leg(l["id"], int(l["k"]), l.get("dir", "out")) for l in data["legs"])
        arr = np.array([complex(re, im) for re, im in data["data"]])
        return cls(legs, arr)



def contract(
    network: Sequence[DenseTensor], plan: Iterable[tuple] | None = None, check_dirs: bool = False
) -> DenseTensor:
    """Contract legs paired by ``plan`` (bilinear, no conjugation).

    Without a plan, legs sharing an id across two tensors are contracted.
    Pairwise contractions are ordered greedily by smallest intermediate size.
    """
    tensors = list(network)
    if plan is None:
        # legs repeated across tensors are joined; the second copy is renamed
        pairs, seen, renamed = [], set(), []
        for t in tensors:
            mapping = {}
            for l in t.legs:
                if l.id in seen:
                    mapping[l.id] = ("__partner", l.id)
                    pairs.append((l.id, ("__partner", l.id)))
                seen.add(l.id)
            renamed.append(t.relabel(mapping) if mapping else t)
        tensors = renamed
    else:
        pairs = [tuple(p) for p in plan]
        all_ids = [l.id for t in tensors for l in t.legs]
        if len(set(all_ids)) != len(all_ids):
            raise ValueError("duplicate leg ids in network")

    where: dict = {}
    for t_i, t in enumerate(tensors):
        for l in t.legs:
            where[l.id] = t_i
    for a, b in pairs:
        if a not in where or b not in where:
            raise ValueError(f"plan refers to unknown leg {a!r} or {b!r}")
        la = tensors[where[a]].leg(a)
        lb = tensors[where[b]].leg(b)
        if la.k != lb.k:
            raise ValueError(f"dimension mismatch on pair ({a!r}, {b!r})")
        if check_dirs and la.dir == lb.dir:
            raise ValueError(f"pair ({a!r}, {b!r}) joins legs of equal direction")

    live: dict[int, DenseTensor] = dict(enumerate(tensors))
    pending = list(pairs)

    def locate(leg_id) -> int:
        for i, t in live.items():
            if leg_id in t.leg_ids:
                return i
        raise KeyError(leg_id)

    while pending:
        # self-traces first
        for a, b in list(pending):
            ia, ib = locate(a), locate(b)
            if ia == ib:
                live[ia] = _trace(live[ia], a, b)
                pending.remove((a, b))
        if not pending:
            break
        best = None
        for a, b in pending:
            ia, ib = locate(a), locate(b)
            shared = [
                (x, y) for x, y in pending if {locate(x), locate(y)} == {ia, ib}
            ]
            size = live[ia].data.size * live[ib].data.size
            for x, y in shared:
                size //= live[locate(x)].leg(x).dim ** 2
            key = (size, min(ia, ib), max(ia, ib))
            if best is None or key < best[0]:
                best = (key, ia, ib, shared)
        _, ia, ib, shared = best
        live[ia] = _pair(live[ia], live[ib], shared)
        del live[ib]
        for p in shared:
            pending.remove(p)

    # outer product of disconnected pieces
    keys = sorted(live)
    out = live[keys[0]]
    for k in keys[1:]:
        out = _pair(out, live[k], [])
    return out


def _trace(t: DenseTensor, a, b) -> DenseTensor:
    ia, ib = t.leg_ids.index(a), t.leg_ids.index(b)
    data = np.trace(t.data, axis1=ia, axis2=ib)
    legs = tuple(l for i, l in enumerate(t.legs) if i not in (ia, ib))
    return DenseTensor(legs, data)


def _pair(x: DenseTensor, y: DenseTensor, shared: list[tuple]) -> DenseTensor:
    ax, ay = [], []
    for a, b in shared:
        if a in x.leg_ids:
            ax.append(x.leg_ids.index(a))
            ay.append(y.leg_ids.index(b))
        else:
            ax.append(x.leg_ids.index(b))
            ay.append(y.leg_ids.index(a))
    data = np.tensordot(x.data, y.data, axes=(ax, ay))
    legs = tuple(l for i, l in enumerate(x.legs) if i not in ax) + tuple(
        l for i, l in enumerate(y.legs) if i not in ay
    )
    return DenseTensor(legs, data)


def hs_inner(a: DenseTensor, b: DenseTensor) -> complex:
    """Sum of conj(a) * b over identical leg signatures."""
    if [(l.id, l.k) for l in a.legs] != [(l.id, l.k) for l in b.legs]:
        raise ValueError("leg signatures differ")
    return complex(np.vdot(a.data, b.data))


def reduced_density(state: DenseTensor, keep: Sequence, normalize: bool = True) -> np.ndarray:
    """Marginal on the legs ``keep`` (in that order)."""
    ids = state.leg_ids
    if not set(keep) <= set(ids):
        raise ValueError("keep is not a subset of the state's legs")
    order = [ids.index(i) for i in keep] + [i for i, l in enumerate(ids) if l not in keep]
    dk = int(np.prod([state.legs[i].dim for i in order[: len(keep)]], dtype=np.int64))
    psi = state.data.transpose(order).reshape(dk, -1)
    rho = psi @ psi.conj().T
    if normalize:
        rho = rho / np.trace(rho).real
    return rho


def entropy_bits(rho: np.ndarray, tol: float = 1e-9) -> float:
    """Von Neumann entropy in bits."""
    rho = np.asarray(rho)
    if np.abs(rho - rho.conj().T).max() > tol:
        raise ValueError("density matrix is not Hermitian")
    w = np.linalg.eigvalsh(rho)
    if w.min() < -tol:
        raise ValueError("density matrix is not positive semidefinite")
    if abs(w.sum() - 1) > tol:
        raise ValueError("density matrix does not have unit trace")
    w = w[w > EIG_CUTOFF]
    return float(-(w * np.log2(w)).sum())


def pure_state_entropy(vec: np.ndarray, n_slots: int, region: Iterable[int]) -> float:
    """Entropy of a slot subset of a pure state given as a 2**n vector.

    Rows and columns of the bipartite coefficient matrix that vanish
    identically are dropped first; Bell-pair states are very sparse.
    """
    region = sorted(set(region))
    if not region or len(region) == n_slots:
        return 0.0
    rest = [s for s in range(n_slots) if s not in region]
    psi = np.asarray(vec).reshape((2,) * n_slots).transpose(region + rest)
    psi = psi.reshape(2 ** len(region), 2 ** len(rest))
    nz = np.abs(psi) > 0
    rows = np.flatnonzero(nz.any(axis=1))
    cols = np.flatnonzero(nz.any(axis=0))
    psi = psi[np.ix_(rows, cols)]
    if psi.shape[0] > psi.shape[1]:
        psi = psi.T
    rho = psi @ psi.conj().T
    rho /= np.trace(rho).real
    return entropy_bits((rho + rho.conj().T) / 2)


# ------------------------------------------------------------------ pairings


def pair_entropy(m: np.ndarray) -> float:
    """Entanglement, in bits, of the two-slot state with coefficient matrix m."""
    s = np.linalg.svd(np.asarray(m), compute_uv=False) ** 2
    p = s / s.sum()
    p = p[p > EIG_CUTOFF]
    return float(-(p * np.log2(p)).sum())


@dataclass(frozen=True, eq=False)
class PairingState:
    """Product of two-slot states: sum over a, b of mats[i][a, b] |a>_{s1} |b>_{s2}."""

    n_slots: int
    pairs: tuple[tuple[int, int], ...]
    mats: tuple[np.ndarray, ...] = ()
    scalar: complex = 1.0
    perms: dict = field(default_factory=dict)

    def __post_init__(self):
        flat = [s for p in self.pairs for s in p]
        if sorted(flat) != list(range(self.n_slots)):
            raise ValueError("pairs must form a perfect matching of the slots")
        if not self.mats:
            object.__setattr__(self, "mats", tuple(epsilon_pair() for _ in self.pairs))
        if len(self.mats) != len(self.pairs):
            raise ValueError("one matrix per pair is required")
        for name, perm in self.perms.items():
            if sorted(perm) != list(range(len(perm))):
                raise ValueError(f"permutation for {name!r} is not a bijection")

    @property
    def partner(self) -> dict[int, int]:
        out = {}
        for a, b in self.pairs:
            out[a], out[b] = b, a
        return out

    def norm_sq(self) -> float:
        val = abs(self.scalar) ** 2
        for m in self.mats:
            val *= float(np.vdot(m, m).real)
        return val

    def entropy(self, region: Iterable[int]) -> float:
        region = set(region)
        return sum(
            pair_entropy(m) for (a, b), m in zip(self.pairs, self.mats) if (a in region) != (b in region)
        )

    def crossing_pairs(self, region: Iterable[int]) -> list[int]:
        region = set(region)
        return [i for i, (a, b) in enumerate(self.pairs) if (a in region) != (b in region)]

    def to_json(self) -> dict:
        out = {
            "slots": self.n_slots,
            "pairs": [list(p) for p in self.pairs],
            "perms": {str(k): list(v) for k, v in self.perms.items()},
            "scalar": [float(complex(self.scalar).real), float(complex(self.scalar).imag)],
        }
        eps = epsilon_pair()
        if any(not np.allclose(m, eps) for m in self.mats):
            out["mats"] = [[[float(z.real), float(z.imag)] for z in m.reshape(4)] for m in self.mats]
        return out

    @classmethod
    def from_json(cls, data: dict) -> "PairingState":
        mats = ()
        if "mats" in data:
            mats = tuple(np.array([complex(a, b) for a, b in m]).reshape(2, 2) for m in data["mats"])
        re, im = data.get("scalar", [1.0, 0.0])
        return cls(
            int(data["slots"]),
            tuple(tuple(int(x) for x in p) for p in data["pairs"]),
            mats,
            complex(re, im),
            {k: list(v) for k, v in data.get("perms", {}).items()},
        )


def pairing_entropy(state: PairingState, region: Iterable[int]) -> float:
    """Entropy of a slot subset, in bits, by counting cut pairs."""
    return state.entropy(region)


def pairing_to_dense(state: PairingState, limit: int = DENSE_SLOT_LIMIT) -> np.ndarray:
    """Explicit 2**n state vector (C order over slots)."""
    n = state.n_slots
    if n > limit:
        raise ValueError(f"{n} slots exceeds the dense limit of {limit}")
    vec = np.array(complex(state.scalar))
    axes: list[int] = []
    for (a, b), m in zip(state.pairs, state.mats):
        vec = np.multiply.outer(vec, np.asarray(m, dtype=complex))
        axes += [a, b]
    if n == 0:
        return vec.reshape(1)
    # axis i of vec currently holds slot axes[i]
    order = np.argsort(axes)
    return np.ascontiguousarray(vec.transpose(order)).reshape(2**n)


def pairing_reduced_density(state: PairingState, keep: Sequence[int]) -> np.ndarray:
    """Exact marginal of a pairing state on the slots ``keep`` (trace one)."""
    keep = list(keep)
    pos = {s: i for i, s in enumerate(keep)}
    n = len(keep)
    rho = np.ones((), dtype=complex)
    ket_axes: list[int] = []
    bra_axes: list[int] = []
    for (a, b), m in zip(state.pairs, state.mats):
        m = np.asarray(m, dtype=complex)
        ia, ib = a in pos, b in pos
        if ia and ib:
            v = m / np.linalg.norm(m)
            rho = np.multiply.outer(rho, np.multiply.outer(v, v.conj()))
            ket_axes += [pos[a], pos[b]]
            bra_axes += [pos[a], pos[b]]
        elif ia or ib:
            r = m @ m.conj().T if ia else m.T @ m.conj()
            rho = np.multiply.outer(rho, r / np.trace(r).real)
            ket_axes.append(pos[a] if ia else pos[b])
            bra_axes.append(pos[a] if ia else pos[b])
    # current axis layout: for each factor, its ket axes then bra axes
    layout: list[tuple[str, int]] = []
    ki = bi = 0
    for (a, b), _ in zip(state.pairs, state.mats):
        ia, ib = a in pos, b in pos
        width = (2 if ia and ib else 1) if (ia or ib) else 0
        layout += [("k", x) for x in ket_axes[ki:ki + width]]
        layout += [("b", x) for x in bra_axes[bi:bi + width]]
        ki += width
        bi += width
    if n == 0:
        return np.ones((1, 1), dtype=complex)
    target = [("k", i) for i in range(n)] + [("b", i) for i in range(n)]
    order = [layout.index(t) for t in target]
    return rho.transpose(order).reshape(2**n, 2**n)
