import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hitlab.tensorcore import (
    DenseTensor,
    Leg,
    PairingState,
    contract,
    entropy_bits,
    hs_inner,
    pair_entropy,
    pairing_entropy,
    pairing_reduced_density,
    pairing_to_dense,
    pure_state_entropy,
    reduced_density,
)


def _rand(rng, shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def _svd_entropy(vec, n, region):
    """Independent route: Schmidt spectrum of the bipartition."""
    rest = [s for s in range(n) if s not in region]
    m = vec.reshape((2,) * n).transpose(list(region) + rest).reshape(2 ** len(region), -1)
    s = np.linalg.svd(m, compute_uv=False) ** 2
    s = s / s.sum()
    s = s[s > 1e-14]
    return float(-(s * np.log2(s)).sum())


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_contract_matches_einsum_triangle(seed):
    rng = np.random.default_rng(seed)
    a = DenseTensor((Leg("x", 1), Leg("y", 2), Leg("o1", 1)), _rand(rng, (2, 4, 2)))
    b = DenseTensor((Leg("y", 2), Leg("z", 1), Leg("o2", 2)), _rand(rng, (4, 2, 4)))
    c = DenseTensor((Leg("z", 1), Leg("x", 1)), _rand(rng, (2, 2)))
    out = contract([a, b, c])
    ref = np.einsum("xyo,yzp,zx->op", a.data, b.data, c.data)
    assert sorted(out.leg_ids) == ["o1", "o2"]
    assert np.allclose(out.transpose_legs(["o1", "o2"]).data, ref)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_contract_with_plan_and_trace(seed):
    rng = np.random.default_rng(seed)
    a = DenseTensor((Leg("a0", 1), Leg("a1", 1), Leg("a2", 1)), _rand(rng, (2, 2, 2)))
    b = DenseTensor((Leg("b0", 1), Leg("b1", 1)), _rand(rng, (2, 2)))
    out = contract([a, b], [("a0", "a1"), ("a2", "b0")])
    ref = np.einsum("iij,jk->k", a.data, b.data)
    assert np.allclose(out.data, ref)


def test_contract_errors():
    a = DenseTensor((Leg("a", 1),), np.ones(2))
    b = DenseTensor((Leg("b", 2),), np.ones(4))
    with pytest.raises(ValueError):
        contract([a, b], [("a", "b")])
    with pytest.raises(ValueError):
        contract([a, b], [("a", "nope")])
    c = DenseTensor((Leg("c", 1, "out"),), np.ones(2))
    d = DenseTensor((Leg("d", 1, "out"),), np.ones(2))
    with pytest.raises(ValueError):
        contract([c, d], [("c", "d")], check_dirs=True)
    with pytest.raises(ValueError):
        DenseTensor((Leg("a", 1), Leg("a", 1)), np.ones(4))
    with pytest.raises(ValueError):
        DenseTensor((Leg("a", 1),), np.ones(3))


def test_dense_tensor_json_roundtrip():
    rng = np.random.default_rng(3)
    t = DenseTensor.from_vector(_rand(rng, 16), [1, 2, 1])
    u = DenseTensor.from_json(t.to_json())
    assert u.leg_ids == t.leg_ids and np.allclose(u.data, t.data)
    assert hs_inner(t, u) == pytest.approx(t.norm() ** 2)


def test_entropy_validation():
    with pytest.raises(ValueError):
        entropy_bits(np.array([[0.5, 0.1], [0.0, 0.5]]))
    with pytest.raises(ValueError):
        entropy_bits(np.diag([1.5, -0.5]))
    with pytest.raises(ValueError):
        entropy_bits(np.diag([0.5, 0.4]))
    assert entropy_bits(np.eye(4) / 4) == pytest.approx(2)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**32 - 1), st.data())
def test_pure_state_entropy_matches_svd(n, seed, data):
    rng = np.random.default_rng(seed)
    vec = _rand(rng, 2**n)
    vec /= np.linalg.norm(vec)
    region = sorted(data.draw(st.sets(st.integers(0, n - 1), min_size=1, max_size=n - 1)))
    assert pure_state_entropy(vec, n, region) == pytest.approx(_svd_entropy(vec, n, region), abs=1e-9)
    rest = [s for s in range(n) if s not in region]
    assert pure_state_entropy(vec, n, region) == pytest.approx(pure_state_entropy(vec, n, rest), abs=1e-9)


@st.composite
def pairings(draw, max_pairs=5, unitary=False):
    m = draw(st.integers(1, max_pairs))
    slots = draw(st.permutations(list(range(2 * m))))
    pairs = tuple((slots[2 * i], slots[2 * i + 1]) for i in range(m))
    mats = ()
    if unitary:
        seed = draw(st.integers(0, 2**32 - 1))
        rng = np.random.default_rng(seed)
        mats = tuple(np.linalg.qr(_rand(rng, (2, 2)))[0] for _ in range(m))
    return PairingState(2 * m, pairs, mats)


@settings(max_examples=40, deadline=None)
@given(pairings(unitary=False) | pairings(unitary=True), st.data())
def test_pairing_entropy_counts_cut_pairs(state, data):
    n = state.n_slots
    region = sorted(data.draw(st.sets(st.integers(0, n - 1), max_size=n)))
    vec = pairing_to_dense(state)
    dense = _svd_entropy(vec / np.linalg.norm(vec), n, region) if 0 < len(region) < n else 0.0
    assert pairing_entropy(state, region) == pytest.approx(dense, abs=1e-9)
    assert pairing_entropy(state, region) == pytest.approx(len(state.crossing_pairs(region)))


@settings(max_examples=40, deadline=None)
@given(pairings(max_pairs=4, unitary=True), st.data())
def test_pairing_marginal_matches_dense(state, data):
    n = state.n_slots
    keep = data.draw(st.lists(st.integers(0, n - 1), unique=True, min_size=1, max_size=min(n, 5)))
    vec = pairing_to_dense(state)
    t = DenseTensor.from_vector(vec, [1] * n)
    assert np.allclose(pairing_reduced_density(state, keep), reduced_density(t, keep), atol=1e-12)


def test_pairing_state_checks_and_json():
    with pytest.raises(ValueError):
        PairingState(4, ((0, 1), (1, 2)))
    with pytest.raises(ValueError):
        PairingState(2, ((0, 1),), (np.eye(2), np.eye(2)))
    with pytest.raises(ValueError):
        PairingState(2, ((0, 1),), perms={"e": [0, 0]})
    s = PairingState(4, ((0, 3), (1, 2)), scalar=-2.0, perms={"7": [1, 0]})
    d = s.to_json()
    assert "mats" not in d
    r = PairingState.from_json(d)
    assert r.pairs == s.pairs and r.scalar == s.scalar and r.perms == s.perms
    u = PairingState(2, ((0, 1),), (np.array([[1, 0], [0, 1j]]),))
    assert "mats" in u.to_json()
    assert np.allclose(PairingState.from_json(u.to_json()).mats[0], u.mats[0])


def test_singlet_norm_and_pair_entropy():
    s = PairingState(2, ((0, 1),))
    assert s.norm_sq() == pytest.approx(2)
    assert pair_entropy(np.eye(2)) == pytest.approx(1)
    assert pair_entropy(np.diag([1, 0])) == pytest.approx(0)
    with pytest.raises(ValueError):
        pairing_to_dense(PairingState(30, tuple((2 * i, 2 * i + 1) for i in range(15))))
