"""SU(2) machinery on products of qubit slots.

States on n slots are numpy arrays of length 2**n in C order: slot 0 is the
most significant bit.  Operators are (2**n, 2**n) matrices in the same order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

TOL = 1e-9

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)


@dataclass(frozen=True, order=True)
class SpinLabel:
    twice_j: int

    def __post_init__(self):
        if self.twice_j < 0:
            raise ValueError("spin must be non-negative")

    @classmethod
    def of(cls, j) -> "SpinLabel":
        tj = Fraction(j) * 2
        if tj.denominator != 1:
            raise ValueError(f"{j} is not a half-integer")
        return cls(int(tj))

    @property
    def j(self) -> Fraction:
        return Fraction(self.twice_j, 2)

    @property
    def dim(self) -> int:
        return self.twice_j + 1

    @property
    def casimir(self) -> float:
        j = self.twice_j / 2
        return j * (j + 1)

    def __str__(self) -> str:
        return str(self.j)


def epsilon_pair() -> np.ndarray:
    """The arc tensor i*epsilon: entries (0,1) -> i, (1,0) -> -i."""
    return np.array([[0, 1j], [-1j, 0]], dtype=complex)


def epsilon_vector() -> np.ndarray:
    return epsilon_pair().reshape(4)


def loop_value() -> complex:
    """Closing an arc on itself with the planar pairing."""
    e = epsilon_pair()
    return complex(np.einsum("ab,ab->", e, e))


def embed(op: np.ndarray, slot: int, n: int) -> np.ndarray:
    """Single-slot operator acting on ``slot`` of an n-slot register."""
    out = np.ones((1, 1), dtype=complex)
    for s in range(n):
        out = np.kron(out, op if s == slot else I2)
    return out


def permutation_operator(perm, n: int) -> np.ndarray:
    """Operator sending slot s of the input to slot perm[s] of the output."""
    perm = list(perm)
    dim = 2**n
    idx = np.arange(dim).reshape((2,) * n)
    # output axis perm[s] carries input axis s
    inv = [0] * n
    for s, t in enumerate(perm):
        inv[t] = s
    moved = np.transpose(idx, inv).reshape(dim)
    out = np.zeros((dim, dim), dtype=complex)
    out[np.arange(dim), moved] = 1.0
    return out


def _dicke(n: int, w: int) -> np.ndarray:
    v = np.zeros(2**n, dtype=complex)
    for ones in itertools.combinations(range(n), w):
        v[sum(1 << (n - 1 - s) for s in ones)] = 1.0
    return v / np.linalg.norm(v)


@lru_cache(maxsize=None)
def _symmetrizer(n: int) -> np.ndarray:
    out = np.zeros((2**n, 2**n), dtype=complex)
    for w in range(n + 1):
        d = _dicke(n, w)
        out += np.outer(d, d.conj())
    return out


def symmetrizer(n: int) -> np.ndarray:
    """Projector onto the symmetric subspace of n qubits (trace n+1)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return _symmetrizer(n).copy()


@dataclass(frozen=True)
class GeneratorTriple:
    k: int
    Jx: np.ndarray
    Jy: np.ndarray
    Jz: np.ndarray

    @property
    def components(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (self.Jx, self.Jy, self.Jz)

    def casimir(self) -> np.ndarray:
        return self.Jx @ self.Jx + self.Jy @ self.Jy + self.Jz @ self.Jz


@lru_cache(maxsize=None)
def _generators(k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    return tuple(
        sum(embed(s / 2, slot, k) for slot in range(k)) for s in (PAULI_X, PAULI_Y, PAULI_Z)
    )


def total_spin_generators(k: int) -> GeneratorTriple:
    if k < 1:
        raise ValueError("k must be at least 1")
    jx, jy, jz = _generators(k)
    return GeneratorTriple(k, jx.copy(), jy.copy(), jz.copy())


def apply_slot_op(op: np.ndarray, vec: np.ndarray, slot: int, n: int) -> np.ndarray:
    """Apply a single-slot operator to an n-slot state without forming 2**n matrices."""
    psi = np.asarray(vec).reshape((2,) * n)
    out = np.tensordot(op, psi, axes=([1], [slot]))
    return np.moveaxis(out, 0, slot).reshape(-1)


def apply_total_spin(vec: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(Jx psi, Jy psi, Jz psi) for the total spin of n slots, matrix-free."""
    return tuple(
        sum(apply_slot_op(s / 2, vec, slot, n) for slot in range(n)) for s in (PAULI_X, PAULI_Y, PAULI_Z)
    )


def irrep_multiplicities(k: int) -> dict[Fraction, int]:
    """Multiplicity of each total spin j in (spin 1/2)^k."""
    if k < 1:
        raise ValueError("k must be at least 1")
    mult = {1: 1}  # keyed by 2j
    for _ in range(k - 1):
        nxt: dict[int, int] = {}
        for tj, m in mult.items():
            nxt[tj + 1] = nxt.get(tj + 1, 0) + m
            if tj > 0:
                nxt[tj - 1] = nxt.get(tj - 1, 0) + m
        mult = nxt
    return {Fraction(tj, 2): mult[tj] for tj in sorted(mult)}


@dataclass(frozen=True)
class Branch:
    """One irrep copy produced by the coupling recursion.

    ``W`` maps the 2j symmetrized strands into the k slots, so W W^dagger is a
    multiple of this copy's projector.  ``diagram`` is the drawn slot diagram
    (parent diagram followed by a symmetrizer or a cap-cup on the open
    slots) and ``prefactor`` its inverse squared Hilbert-Schmidt norm.
    """

    spin: SpinLabel
    path: tuple[int, ...]  # 2j after each coupling step
    W: np.ndarray
    diagram: np.ndarray
    open_slots: tuple[int, ...]
    prefactor: float

    @property
    def projector(self) -> np.ndarray:
        G = self.W @ self.W.conj().T
        lam = np.trace(G).real / self.spin.dim
        return G / lam


@dataclass(frozen=True)
class SpinProjectorSet:
    k: int
    entries: tuple[tuple[SpinLabel, int, np.ndarray], ...]
    branches: tuple[Branch, ...]

    def projector(self, j) -> np.ndarray:
        s = SpinLabel.of(j)
        for lab, _, P in self.entries:
            if lab == s:
                return P
        return np.zeros((2**self.k, 2**self.k), dtype=complex)

    def spins(self) -> list[SpinLabel]:
        return [lab for lab, _, _ in self.entries]


def _couple_up(W: np.ndarray, k: int, tj: int) -> np.ndarray:
    # new slot appended as a fresh strand, then all 2j+1 strands symmetrized
    return np.kron(W, I2) @ _symmetrizer(tj + 1)


def _couple_down(W: np.ndarray, k: int, tj: int) -> np.ndarray:
    # last strand joined to the new slot by an arc
    W4 = W.reshape(2**k, 2**(tj - 1), 2)  # (slots, first strands, last strand)
    out = np.einsum("xbc,cn->xnb", W4, epsilon_pair())  # (slots, new slot, strands)
    out = out.reshape(2 ** (k + 1), 2 ** (tj - 1))
    return out @ _symmetrizer(tj - 1)


def embed_on(op: np.ndarray, slots, n: int) -> np.ndarray:
    """Operator on the listed slots (in that order) of an n-slot register."""
    slots = list(slots)
    rest = [s for s in range(n) if s not in slots]
    full = np.kron(op, np.eye(2 ** len(rest), dtype=complex))
    order = slots + rest
    P = permutation_operator(order, n)  # moves slot i of (slots+rest) layout to order[i]
    return P @ full @ P.conj().T


@lru_cache(maxsize=None)
def _branches(k: int) -> tuple[Branch, ...]:
    if k == 1:
        W = I2.copy()
        return (Branch(SpinLabel(1), (1,), W, W.copy(), (0,), 1 / 2),)
    cap = np.outer(epsilon_vector(), epsilon_vector().conj())
    out = []
    for b in _branches(k - 1):
        tj = b.spin.twice_j
        parent = np.kron(b.diagram, I2)
        new = k - 1
        if tj > 0:
            W = _couple_down(b.W, k - 1, tj)
            D = parent @ embed_on(cap, [b.open_slots[-1], new], k)
            hs = float(np.vdot(D, D).real)
            out.append(Branch(SpinLabel(tj - 1), b.path + (tj - 1,), W, D, b.open_slots[:-1], 1.0 / hs))
        W = _couple_up(b.W, k - 1, tj)
        opened = b.open_slots + (new,)
        D = parent @ embed_on(_symmetrizer(len(opened)), opened, k)
        hs = float(np.vdot(D, D).real)
        out.append(Branch(SpinLabel(tj + 1), b.path + (tj + 1,), W, D, opened, 1.0 / hs))
    return tuple(out)


@lru_cache(maxsize=None)
def _projector_set(k: int) -> SpinProjectorSet:
    branches = _branches(k)
    acc: dict[int, list] = {}
    for b in branches:
        acc.setdefault(b.spin.twice_j, []).append(b)
    entries = []
    for tj in sorted(acc):
        P = sum(b.projector for b in acc[tj])
        P = (P + P.conj().T) / 2
        entries.append((SpinLabel(tj), len(acc[tj]), P))
    return SpinProjectorSet(k, tuple(entries), branches)


def spin_projectors(k: int) -> SpinProjectorSet:
    """Total-spin projectors on k qubits via the singlet/symmetrizer recursion."""
    if k < 1:
        raise ValueError("k must be at least 1")
    return _projector_set(k)


def random_su2(rng: np.random.Generator) -> np.ndarray:
    """Haar-random SU(2) matrix."""
    a = rng.normal(size=4)
    a /= np.linalg.norm(a)
    return np.array([[a[0] + 1j * a[1], a[2] + 1j * a[3]], [-a[2] + 1j * a[3], a[0] - 1j * a[1]]])


def spin_matrices(j) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Standard spin-j generator matrices in the |j, m> basis, m descending."""
    tj = SpinLabel.of(j).twice_j
    jj = tj / 2
    ms = [jj - i for i in range(tj + 1)]
    jp = np.zeros((tj + 1, tj + 1), dtype=complex)
    for i in range(1, tj + 1):
        m = ms[i]
        jp[i - 1, i] = math.sqrt(jj * (jj + 1) - m * (m + 1))
    jx = (jp + jp.conj().T) / 2
    jy = (jp - jp.conj().T) / 2j
    jz = np.diag(ms).astype(complex)
    return jx, jy, jz
