import struct

import numpy as np
import pytest
from hypothesis import given, strategies as st

from thermoplate.history import (HistoryField, advance, dissipation_pairing, init_history,
                                 load_snapshot, m_norm, representation_check, save_snapshot,
                                 tail_functional)
from thermoplate.kernel import build_quadrature, make_exponential, make_table
from thermoplate.spectral import DomainSpec, build_basis


@pytest.fixture(scope="module")
def small():
    b = build_basis(DomainSpec(modes=3))
    q = build_quadrature(make_exponential(1.0, 2.0), 0.25, 1e-6)
    return b, q


def _naive_step(vals, q):
    # eta_new(s_1) = q, eta_new(s_j) = eta_old(s_{j-1}) + q
    out = np.empty_like(vals)
    out[0] = q
    out[1:] = vals[:-1] + q
    return out


@given(seed=st.integers(0, 10_000), steps=st.integers(1, 80))
def test_transport_matches_naive_shift(seed, steps):
    b = build_basis(DomainSpec(modes=3))
    q = build_quadrature(make_exponential(1.0, 2.0), 0.25, 1e-6)  # M = 28, so wraps occur
    rng = np.random.default_rng(seed)
    init = rng.standard_normal((q.M, 3))
    h = HistoryField(q, b, init)
    ref = init.copy()
    th_old = rng.standard_normal(3)
    for _ in range(steps):
        th_new = rng.standard_normal(3)
        advance(h, th_old, th_new, q.ds)
        ref = _naive_step(ref, 0.5 * q.ds * (th_old + th_new))
        th_old = th_new
    np.testing.assert_allclose(h.values(), ref, atol=1e-12)
    # incremental memory agrees with a fresh quadrature
    np.testing.assert_allclose(h.memory, q.node_weights @ ref, atol=1e-12)


def test_memory_table_kernel_path():
    b = build_basis(DomainSpec(modes=2))
    s = np.linspace(0, 20, 201)
    q = build_quadrature(make_table(s, np.exp(-s) / (1 + s)), 0.1, 1e-6)
    assert q.ratio is None
    rng = np.random.default_rng(1)
    h = HistoryField(q, b)
    for _ in range(3 * q.M):
        h.push(rng.standard_normal(2) * 0.01)
    direct = q.node_weights @ h.values()
    np.testing.assert_allclose(h.memory, direct, atol=1e-13)
    h.resync()
    np.testing.assert_allclose(h.memory, direct, atol=1e-15)


def test_shifted_memory(small):
    b, q = small
    rng = np.random.default_rng(2)
    h = HistoryField(q, b, rng.standard_normal((q.M, 3)))
    vals = h.values()
    np.testing.assert_allclose(h.shifted_memory(), q.node_weights[1:] @ vals[:-1], atol=1e-13)


def test_constant_phi_history(small):
    b, q = small
    phi = np.array([1.0, -2.0, 0.5])
    h = init_history(q, b, phi)
    np.testing.assert_allclose(h.values(), np.outer(q.nodes, phi), atol=1e-13)
    h2 = init_history(q, b, lambda s: np.outer(np.ones_like(s), phi))
    np.testing.assert_allclose(h2.values(), h.values(), atol=1e-15)


def test_norms(small):
    b, q = small
    vals = np.random.default_rng(3).standard_normal((q.M, 3))
    h = HistoryField(q, b, vals)
    lam = b.eigenvalues
    assert m_norm(h, 1.0) ** 2 == pytest.approx(q.node_weights @ (vals ** 2 @ lam), rel=1e-13)
    assert h.norm_sq(0.0) == pytest.approx(q.node_weights @ (vals ** 2).sum(1), rel=1e-13)
    assert dissipation_pairing(h) == pytest.approx(-1.0 * h.norm_sq(1.0), rel=1e-12)  # delta = 2


def test_J_weight_partition_example():
    b = build_basis(DomainSpec(modes=2))
    q = build_quadrature(make_exponential(1.0, 1.0), 0.01, 1e-10)
    unit = np.array([1.0, 0.0])
    h = HistoryField(q, b, np.tile(unit, (q.M, 1)))
    J = -float(unit @ h.memory)
    assert J == pytest.approx(-(1.0 - q.tail - 0.5 * q.weights[0]), abs=1e-13)


def test_tail_functional(small):
    b, q = small
    h = HistoryField(q, b, np.random.default_rng(4).standard_normal((q.M, 3)))
    full, _ = tail_functional(h, 1.0)
    assert full == pytest.approx(h.norm_sq(1.0), rel=1e-13)
    vals = [tail_functional(h, y)[0] for y in (1, 2, 4, 8)]
    assert all(a >= b_ for a, b_ in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        tail_functional(h, 0.5)


def test_representation_formula(small):
    b, q = small
    rng = np.random.default_rng(5)
    h = HistoryField(q, b)
    thetas = [np.zeros(3)]
    for _ in range(40):  # past the horizon M = 28
        th = rng.standard_normal(3)
        advance(h, thetas[-1], th, q.ds)
        thetas.append(th)
    assert representation_check(h, thetas, q.ds) <= 1e-13
    assert representation_check(h, thetas[:21], q.ds, cadence=1) > 1e-3  # wrong series
    with pytest.raises(ValueError):
        representation_check(h, thetas, 2 * q.ds)


def test_advance_rejects_mismatched_step(small):
    b, q = small
    with pytest.raises(ValueError):
        advance(HistoryField(q, b), np.zeros(3), np.zeros(3), 2 * q.ds)


def test_snapshot_round_trip(tmp_path, small):
    b, q = small
    vals = np.random.default_rng(6).standard_normal((q.M, 3))
    h = HistoryField(q, b, vals)
    p = tmp_path / "eta.bin"
    save_snapshot(h, p)
    raw = p.read_bytes()
    assert struct.unpack_from("<QQd", raw) == (q.M, 3, q.ds)
    assert len(raw) == struct.calcsize("<QQd") + 8 * q.M * 3
    np.testing.assert_array_equal(load_snapshot(p, q, b).values(), h.values())
    other = build_quadrature(make_exponential(1.0, 2.0), 0.5, 1e-6)
    with pytest.raises(ValueError):
        load_snapshot(p, other, b)


def test_bad_shape(small):
    b, q = small
    with pytest.raises(ValueError):
        HistoryField(q, b, np.zeros((q.M + 1, 3)))
