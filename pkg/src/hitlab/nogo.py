"""Numerical certificates for the symmetry versus uniformity no-go results.

Nothing here is a proof.  Each function evaluates a quantity on small
systems (at most 12 qubits) so that the impossibility statements can be
witnessed: optimized lower bounds, exhaustive grids on small invariant
subspaces, and exact enumeration.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from ._parallel import pmap
from .hit import verify_invariance
from .su2kit import spin_matrices
from .tensorcore import DenseTensor, PairingState, reduced_density

TOL = 1e-9
MAX_DIM = 2**12


def gell_mann(d: int) -> np.ndarray:
    """Traceless Hermitian basis of d x d matrices, orthonormal under tr(A B)."""
    out = []
    for a in range(d):
        for b in range(a + 1, d):
            m = np.zeros((d, d), dtype=complex)
            m[a, b] = m[b, a] = 1
            out.append(m / math.sqrt(2))
            m = np.zeros((d, d), dtype=complex)
            m[a, b], m[b, a] = -1j, 1j
            out.append(m / math.sqrt(2))
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1
        diag[l] = -l
        out.append(np.diag(diag / math.sqrt(l * (l + 1))).astype(complex))
    return np.array(out).reshape(d * d - 1, d, d)


def _full_basis(d: int) -> np.ndarray:
    """Identity / sqrt(d) followed by the Gell-Mann matrices."""
    return np.concatenate([np.eye(d, dtype=complex)[None] / math.sqrt(d), gell_mann(d)])


@dataclass
class GeneratorSpec:
    """N = sum_i (alpha_i 1 + sum_a beta_{i,a} T_a) acting on parties of dims d_i."""

    parties: list  # (d, alpha, [(a, beta)])

    @property
    def dims(self) -> list[int]:
        return [p[0] for p in self.parties]

    def nontrivial(self) -> list[bool]:
        return [any(abs(b) > TOL for _, b in p[2]) for p in self.parties]

    def local(self, i: int) -> np.ndarray:
        d, alpha, betas = self.parties[i]
        T = gell_mann(d)
        out = alpha * np.eye(d, dtype=complex)
        for a, b in betas:
            out = out + b * T[a]
        return out

    def matrix(self) -> np.ndarray:
        dims = self.dims
        D = int(np.prod(dims))
        if D > MAX_DIM:
            raise ValueError(f"total dimension {D} exceeds {MAX_DIM}")
        N = np.zeros((D, D), dtype=complex)
        for i in range(len(dims)):
            op = np.ones((1, 1), dtype=complex)
            for t, d in enumerate(dims):
                op = np.kron(op, self.local(i) if t == i else np.eye(d))
            N += op
        return N

    def operators(self) -> list[np.ndarray]:
        return [self.matrix()]

    @classmethod
    def total_jz(cls, n: int) -> "GeneratorSpec":
        # sigma_z / 2 is the last qubit Gell-Mann element divided by sqrt(2)
        return cls([(2, 0.0, [(2, 1 / math.sqrt(2))]) for _ in range(n)])


def _check_dims(n_total: int, dims: Sequence[int]) -> None:
    if any(d < 2 for d in dims):
        raise ValueError("party dimensions must be at least 2")
    if int(np.prod(dims)) != n_total:
        raise ValueError(f"dims {list(dims)} do not multiply to {n_total}")
    if n_total > MAX_DIM:
        raise ValueError(f"total dimension {n_total} exceeds {MAX_DIM}")


@dataclass
class SectorDecomposition:
    weights: dict  # support size j -> sum of squared coefficients
    coefficients: np.ndarray  # r_{a_1 ... a_n}, index 0 = identity

    def total(self) -> float:
        return math.fsum(self.weights.values())


def sector_weights(rho: np.ndarray, dims: Sequence[int]) -> SectorDecomposition:
    """Expand rho in products of local orthonormal operator bases and bin the
    squared coefficients by the number of non-identity factors.  The j = 0
    entry is the identity term 1/prod(d); all entries sum to tr(rho^2)."""
    rho = np.asarray(rho, dtype=complex)
    D = rho.shape[0]
    if rho.shape != (D, D):
        raise ValueError("rho must be square")
    _check_dims(D, dims)
    n = len(dims)
    # r_{a_1..a_n} = tr(rho (B_{a_1} x ... x B_{a_n})), contracted party by party
    coeff = rho.reshape(list(dims) * 2)
    for i, d in enumerate(dims):
        basis = _full_basis(d)
        # coeff axes: [a_0..a_{i-1}, ket_i..ket_{n-1}, bra_i..bra_{n-1}]
        m = n - i
        coeff = np.tensordot(coeff, basis, axes=([i, i + m], [2, 1]))
        # new basis index appended at the end; move it to position i
        coeff = np.moveaxis(coeff, -1, i)
    coeff = coeff.real if np.allclose(coeff.imag, 0, atol=1e-12) else coeff
    support = np.zeros(coeff.shape, dtype=int)
    for i in range(n):
        shape = [1] * n
        shape[i] = coeff.shape[i]
        support = support + (np.arange(coeff.shape[i]) > 0).reshape(shape)
    sq = np.abs(coeff) ** 2
    weights = {j: float(sq[support == j].sum()) for j in range(n + 1)}
    return SectorDecomposition(weights, coeff)


def lemma_coefficients(dec: SectorDecomposition, k: int) -> tuple[float, float]:
    """Largest |r^k_a| and |r^{kl}_{ab}| (party k plus at most one other)."""
    c = np.abs(dec.coefficients)
    n = c.ndim
    single, pair = 0.0, 0.0
    idx = [0] * n
    for a in range(1, c.shape[k]):
        idx[k] = a
        single = max(single, float(c[tuple(idx)]))
        for l in range(n):
            if l == k:
                continue
            for b in range(1, c.shape[l]):
                j = list(idx)
                j[l] = b
                pair = max(pair, float(c[tuple(j)]))
    return single, pair


def check_u1_invariance(state: np.ndarray, gen: GeneratorSpec, tol: float = TOL) -> tuple[bool, float | None]:
    psi = np.asarray(state, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    v = gen.matrix() @ psi
    c = np.vdot(psi, v)
    ok = float(np.linalg.norm(v - c * psi)) <= tol
    return ok, (float(c.real) if ok else None)


# ----------------------------------------------------------- 2-uniformity


def pair_marginals(psi: np.ndarray, dims: Sequence[int]) -> dict:
    t = np.asarray(psi).reshape(dims)
    n = len(dims)
    out = {}
    for k, l in itertools.combinations(range(n), 2):
        m = np.moveaxis(t, [k, l], [0, 1]).reshape(dims[k] * dims[l], -1)
        out[(k, l)] = m @ m.conj().T
    return out


def single_marginal(psi: np.ndarray, dims: Sequence[int], k: int) -> np.ndarray:
    m = np.moveaxis(np.asarray(psi).reshape(dims), k, 0).reshape(dims[k], -1)
    return m @ m.conj().T


def two_uniform_deviation(psi: np.ndarray, dims: Sequence[int]) -> float:
    """D(psi) = sum_{k<l} || rho_kl - 1/(d_k d_l) ||_F^2 for normalized psi."""
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    total = 0.0
    for (k, l), rho in pair_marginals(psi, dims).items():
        d = dims[k] * dims[l]
        total += float(np.linalg.norm(rho - np.eye(d) / d) ** 2)
    return total


def lemma_deviation(psi: np.ndarray, dims: Sequence[int], k: int = 0) -> float:
    """max_l || rho_kl - 1/d_k x rho_l ||_F."""
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    marg = pair_marginals(psi, dims)
    worst = 0.0
    for l in range(len(dims)):
        if l == k:
            continue
        rho = marg[tuple(sorted((k, l)))]
        rl = single_marginal(psi, dims, l)
        target = np.kron(np.eye(dims[k]) / dims[k], rl) if k < l else np.kron(rl, np.eye(dims[k]) / dims[k])
        worst = max(worst, float(np.linalg.norm(rho - target)))
    return worst


def werner_bound(n: int) -> float:
    """Lower bound on D over SU(2)-invariant n-qubit states.

    Every two-qubit marginal is a Werner state with singlet weight p_kl and
    sum_{k<l} p_kl = C(n,2)/4 + 3n/8; convexity of (4/3)(p - 1/4)^2 gives
    D >= 3n / (8(n-1)).
    """
    if n < 2:
        raise ValueError("need at least two qubits")
    return 3 * n / (8 * (n - 1))


def casimir_kernel(dims: Sequence[int]) -> np.ndarray:
    """Orthonormal basis (columns) of the SU(2)-invariant subspace, each
    party of dimension d carrying spin (d-1)/2."""
    D = int(np.prod(dims))
    _check_dims(D, dims)
    total = []
    for a in range(3):
        op = np.zeros((D, D), dtype=complex)
        for i, d in enumerate(dims):
            m = np.ones((1, 1), dtype=complex)
            for t, dt in enumerate(dims):
                m = np.kron(m, spin_matrices((d - 1) / 2)[a] if t == i else np.eye(dt))
            op += m
        total.append(op)
    C = sum(t @ t for t in total)
    w, v = np.linalg.eigh((C + C.conj().T) / 2)
    return v[:, np.abs(w) < 1e-8]


def symmetric_subspaces(dims: Sequence[int], symmetry) -> list[np.ndarray]:
    """Candidate subspaces: the SU(2) singlet space, each eigenspace of a
    U(1) generator, or the full space."""
    D = int(np.prod(dims))
    _check_dims(D, dims)
    if symmetry is None:
        return [np.eye(D, dtype=complex)]
    if symmetry == "SU2":
        V = casimir_kernel(dims)
        return [V] if V.shape[1] else []
    if isinstance(symmetry, GeneratorSpec):
        if symmetry.dims != list(dims):
            raise ValueError("generator dims do not match")
        w, v = np.linalg.eigh(symmetry.matrix())
        out, start = [], 0
        for i in range(1, len(w) + 1):
            if i == len(w) or abs(w[i] - w[start]) > 1e-8:
                out.append(v[:, start:i])
                start = i
        return out
    raise ValueError(f"unknown symmetry {symmetry!r}")


def _to_vec(x: np.ndarray, V: np.ndarray) -> np.ndarray:
    m = V.shape[1]
    c = x[:m] + 1j * x[m:]
    return V @ c


@dataclass
class TwoUniformCertificate:
    n: int
    dims: list
    symmetry: str
    subspace_dims: list
    min_deviation: float
    lemma_min: float
    werner_bound: float | None
    seed: int
    starts: int
    method: str
    best_state: np.ndarray = field(repr=False, default=None)

    @property
    def certified(self) -> bool:
        return self.min_deviation > 0.0

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "dims": list(self.dims),
            "symmetry": self.symmetry,
            "subspace_dims": list(self.subspace_dims),
            "min_deviation": round(self.min_deviation, 12),
            "lemma_min": round(self.lemma_min, 12),
            "werner_bound": self.werner_bound,
            "seed": self.seed,
            "starts": self.starts,
            "method": self.method,
            "certified": self.certified,
        }


def _minimize(fn, V: np.ndarray, rng: np.random.Generator, starts: int) -> tuple[float, np.ndarray]:
    m = V.shape[1]
    if m == 1:
        v = V[:, 0]
        return fn(v), v

    def obj(x):
        if not np.any(x):
            return 1e9
        return fn(_to_vec(x, V))

    x0s = [rng.normal(size=2 * m) for _ in range(starts)]
    method = "Nelder-Mead" if 2 * m <= 12 else "L-BFGS-B"
    opts = {"xatol": 1e-10, "fatol": 1e-14, "maxiter": 4000} if method == "Nelder-Mead" else {"maxiter": 2000}

    def run(i):
        res = minimize(obj, x0s[i], method=method, options=opts)
        return float(res.fun), i, res.x

    results = pmap(run, range(starts))
    val, _, x = min(results, key=lambda r: (r[0], r[1]))
    v = _to_vec(x, V)
    return val, v / np.linalg.norm(v)


def _grid(fn, V: np.ndarray, points: int) -> tuple[float, np.ndarray]:
    """Exhaustive grid over normalized states of a 2-dimensional subspace,
    modulo global phase: cos(t) v1 + e^{i phi} sin(t) v2."""
    best, arg = math.inf, None
    for t in np.linspace(0, math.pi / 2, points):
        for phi in np.linspace(0, 2 * math.pi, 2 * points, endpoint=False):
            v = math.cos(t) * V[:, 0] + np.exp(1j * phi) * math.sin(t) * V[:, 1]
            f = fn(v)
            if f < best:
                best, arg = f, v
    return best, arg


def _polish(fn, V: np.ndarray, val: float, v: np.ndarray) -> tuple[float, np.ndarray]:
    c = V.conj().T @ v
    res = minimize(lambda x: fn(_to_vec(x, V)), np.concatenate([c.real, c.imag]), method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-15})
    if res.fun < val:
        return float(res.fun), _to_vec(res.x, V)
    return val, v


def min_two_uniform_deviation(
    n: int,
    dims: Sequence[int] | None = None,
    symmetry="SU2",
    seed: int = 0,
    starts: int = 64,
    grid_points: int = 0,
    k: int = 0,
) -> TwoUniformCertificate:
    """Smallest two-uniformity deviation found over states with the symmetry.

    For a two-dimensional subspace and ``grid_points > 0`` an exhaustive grid
    is evaluated and then polished; otherwise seeded multistart local
    minimization is used.  Minima are reduced by (value, start index).
    """
    if n < 4:
        raise ValueError("n >= 4 is required")
    dims = list(dims) if dims is not None else [2] * n
    if len(dims) != n:
        raise ValueError("len(dims) must equal n")
    subs = symmetric_subspaces(dims, symmetry)
    if not subs:
        raise ValueError("no states with this symmetry")
    rng = np.random.default_rng(seed)
    dev = lambda v: two_uniform_deviation(v, dims)
    lem = lambda v: lemma_deviation(v, dims, k)
    best, best_v, lemma_best, method = math.inf, None, math.inf, "multistart"
    for V in subs:
        if V.shape[1] == 2 and grid_points > 0:
            method = "grid"
            val, v = _grid(dev, V, grid_points)
            lval, lv = _grid(lem, V, grid_points)
            val, v = _polish(dev, V, val, v)
            lval, _ = _polish(lem, V, lval, lv)
        else:
            val, v = _minimize(dev, V, rng, starts)
            lval, _ = _minimize(lem, V, rng, max(1, starts // 4))
        if val < best:
            best, best_v = val, v
        lemma_best = min(lemma_best, lval)
    sym = "SU2" if symmetry == "SU2" else ("none" if symmetry is None else "U1")
    wb = werner_bound(n) if symmetry == "SU2" and set(dims) == {2} else None
    return TwoUniformCertificate(n, dims, sym, [V.shape[1] for V in subs], float(best), float(lemma_best),
                                 wb, seed, starts, method, best_v)


# ------------------------------------------------------------ stabilizer code


def _pauli_string(s: str) -> np.ndarray:
    m = {"I": np.eye(2), "X": np.array([[0, 1], [1, 0]]), "Y": np.array([[0, -1j], [1j, 0]]),
         "Z": np.diag([1, -1])}
    out = np.ones((1, 1), dtype=complex)
    for c in s:
        out = np.kron(out, m[c])
    return out


FIVE_QUBIT_STABILIZERS = ("XZZXI", "IXZZX", "XIXZZ", "ZXIXZ")


def five_qubit_code() -> tuple[np.ndarray, np.ndarray]:
    """Logical |0> and |1> of the [[5,1,3]] code."""
    P = np.eye(32, dtype=complex)
    for s in FIVE_QUBIT_STABILIZERS:
        P = P @ (np.eye(32) + _pauli_string(s)) / 2
    zero = P[:, 0] / np.linalg.norm(P[:, 0])
    one = _pauli_string("XXXXX") @ zero
    return zero, one


def perfect_tensor() -> DenseTensor:
    """Six-qubit absolutely maximally entangled state; leg 0 is logical."""
    zero, one = five_qubit_code()
    vec = np.concatenate([zero, one]) / math.sqrt(2)
    return DenseTensor.from_vector(vec, [1] * 6)


# --------------------------------------------------------------- Evenbly check


@dataclass
class EvenblyReport:
    isometry_pass: bool
    su2_pass: bool
    isometry_residual: float
    su2_residual: float

    @property
    def at_most_one(self) -> bool:
        return not (self.isometry_pass and self.su2_pass)

    def to_json(self) -> dict:
        return {
            "isometry_pass": self.isometry_pass,
            "su2_pass": self.su2_pass,
            "isometry_residual": self.isometry_residual,
            "su2_residual": self.su2_residual,
            "at_most_one": self.at_most_one,
        }


def check_evenbly_code(tensor: DenseTensor, logical_leg: int = 0, tol: float = TOL) -> EvenblyReport:
    """(i) rho over (logical, j) is maximally mixed for every physical leg j;
    (ii) the tensor is SU(2)-invariant."""
    ids = tensor.leg_ids
    if logical_leg not in ids:
        raise ValueError(f"no leg {logical_leg}")
    iso = 0.0
    for j in ids:
        if j == logical_leg:
            continue
        rho = reduced_density(tensor, [logical_leg, j])
        d = rho.shape[0]
        iso = max(iso, float(np.linalg.norm(rho - np.eye(d) / d)))
    inv = verify_invariance(tensor, "SU2", tol)
    su2 = max(v for _, v in inv.checks.values())
    return EvenblyReport(iso <= tol, inv.passed, iso, float(su2))


def random_invariant_state(n: int, rng: np.random.Generator) -> np.ndarray:
    V = casimir_kernel([2] * n)
    if V.shape[1] == 0:
        raise ValueError(f"no SU(2)-invariant states on {n} qubits")
    c = rng.normal(size=V.shape[1]) + 1j * rng.normal(size=V.shape[1])
    v = V @ c
    return v / np.linalg.norm(v)


# --------------------------------------------------- balanced bipartitions


def balanced_bipartitions(n_parties: int) -> list[tuple[int, ...]]:
    """One side of every unordered balanced bipartition (the side holding party 0)."""
    if n_parties % 2:
        raise ValueError("need an even number of parties")
    h = n_parties // 2
    return [(0,) + c for c in itertools.combinations(range(1, n_parties), h - 1)]


def count_mm_balanced_bipartitions(state: np.ndarray, dims: Sequence[int], tol: float = TOL) -> int:
    psi = np.asarray(state, dtype=complex)
    _check_dims(psi.size, dims)
    psi = psi / np.linalg.norm(psi)
    t = psi.reshape(dims)
    count = 0
    for side in balanced_bipartitions(len(dims)):
        rest = [i for i in range(len(dims)) if i not in side]
        dA = int(np.prod([dims[i] for i in side]))
        m = np.transpose(t, list(side) + rest).reshape(dA, -1)
        rho = m @ m.conj().T
        if np.linalg.norm(rho - np.eye(dA) / dA) <= tol:
            count += 1
    return count


def opposite_singlets(n_pairs: int) -> np.ndarray:
    """2n qubits with a singlet between parties i and i + n."""
    N = 2 * n_pairs
    s = np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2)
    v = s
    for _ in range(n_pairs - 1):
        v = np.kron(v, s)
    # current order: (0, n), (1, n+1), ...; permute to party order
    order = [x for i in range(n_pairs) for x in (i, i + n_pairs)]
    t = v.reshape([2] * N)
    return np.transpose(t, np.argsort(order)).reshape(-1)


def ghz(n: int) -> np.ndarray:
    v = np.zeros(2**n, dtype=complex)
    v[0] = v[-1] = 1 / math.sqrt(2)
    return v


# -------------------------------------------------------- geometric measure


def geometric_measure_pairing(state: PairingState, d: int = 2) -> float:
    """E_G = 1 - d^{-m} for m maximally entangled pairs of local dimension d."""
    if d < 2:
        raise ValueError("d must be at least 2")
    return 1.0 - float(d) ** (-len(state.pairs))


def max_entangled_pairs(m: int, d: int) -> tuple[np.ndarray, list[int]]:
    """m copies of sum_i |ii>/sqrt(d); parties ordered pair by pair."""
    phi = np.eye(d, dtype=complex).reshape(-1) / math.sqrt(d)
    v = np.ones(1, dtype=complex)
    for _ in range(m):
        v = np.kron(v, phi)
    return v, [d] * (2 * m)


def max_product_overlap(psi: np.ndarray, dims: Sequence[int], seed: int = 0, starts: int = 16,
                        sweeps: int = 200) -> float:
    """max |<a_1 ... a_n|psi>|^2 over product states by alternating updates."""
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    _check_dims(psi.size, dims)
    t = psi.reshape(dims)
    n = len(dims)
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(starts):
        a = [rng.normal(size=d) + 1j * rng.normal(size=d) for d in dims]
        a = [x / np.linalg.norm(x) for x in a]
        prev = -1.0
        for _ in range(sweeps):
            for i in range(n):
                m = t
                # contract all parties except i with conj(a_j)
                for j in reversed(range(n)):
                    if j != i:
                        m = np.tensordot(m, a[j].conj(), axes=([j], [0]))
                a[i] = m / np.linalg.norm(m)
            ov = abs(np.vdot(a[i], m)) ** 2
            if abs(ov - prev) < 1e-15:
                break
            prev = ov
        best = max(best, float(ov))
    return best


def geometric_measure_numeric(psi: np.ndarray, dims: Sequence[int], seed: int = 0, starts: int = 16) -> float:
    return 1.0 - max_product_overlap(psi, dims, seed, starts)
