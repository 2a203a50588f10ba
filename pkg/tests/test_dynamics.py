import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from thermoplate import diagnostics as dg
from thermoplate.dynamics import (ModelParams, NumericalFailure, SchemeConfig, StateVector,
                                  decompose, oracle_matrix, random_state, simulate,
                                  single_mode_oracle, step, zero_state)
from thermoplate.history import HistoryField
from thermoplate.kernel import make_exponential
from thermoplate.spectral import DomainSpec, build_basis
from thermoplate.stationary import Nonlinearity, cubic, energy_E_of_u, find_equilibria, nearest

ZERO_F = Nonlinearity([0.0])


def _setup(modes=8, dt=1e-2, T=1.0, f=None, scheme="imex-cn", stride=1, kernel=None):
    b = build_basis(DomainSpec(modes=modes))
    k = kernel or make_exponential(1.0, 1.0)
    s = SchemeConfig(dt=dt, T=T, scheme=scheme, stride=stride)
    q = s.quadrature(k)
    p = ModelParams(f if f is not None else cubic(1.0), k)
    return b, q, p, s


def test_scheme_config_validation():
    with pytest.raises(ValueError):
        SchemeConfig(dt=0.0)
    with pytest.raises(ValueError):
        SchemeConfig(dt=0.1, scheme="rk4")
    with pytest.raises(ValueError):
        SchemeConfig(dt=0.1, stride=0)
    with pytest.raises(ValueError):
        SchemeConfig(dt=0.3, T=1.0)
    assert SchemeConfig(dt=0.1, T=1.0).steps == 10


def test_random_state_norm_and_determinism():
    b, q, _, _ = _setup()
    a = random_state(b, q, 2.5, seed=7)
    c = random_state(b, q, 2.5, seed=7)
    assert a.norm() == pytest.approx(2.5, rel=1e-12)
    np.testing.assert_array_equal(a.u.coeffs, c.u.coeffs)
    assert not np.array_equal(a.u.coeffs, random_state(b, q, 2.5, seed=8).u.coeffs)


@pytest.mark.parametrize("scheme", ["imex1", "imex-cn"])
def test_zero_is_fixed(scheme):
    b, q, p, s = _setup(scheme=scheme)
    tr = simulate(zero_state(b, q), p, s)
    assert np.abs(tr.u).max() == 0 and np.abs(tr.theta).max() == 0


@pytest.mark.parametrize("scheme", ["imex1", "imex-cn"])
def test_equilibrium_is_fixed(scheme):
    b, q, _, s = _setup(scheme=scheme)
    f = cubic(4.0)
    eq = [e for e in find_equilibria(b, f) if e.u.coeffs[0] > 1][0]
    z = b.zero()
    z0 = StateVector(eq.u, z, z, HistoryField(q, b))
    tr = simulate(z0, ModelParams(f, make_exponential(1.0, 1.0)), s)
    assert np.abs(tr.u - eq.u.coeffs).max() < 1e-11
    assert np.abs(tr.v).max() < 1e-11


@pytest.mark.parametrize("scheme", ["imex1", "imex-cn"])
def test_step_matches_one_step_simulation(scheme):
    b, q, p, _ = _setup(scheme=scheme)
    s = SchemeConfig(dt=1e-2, T=1e-2, scheme=scheme)
    z0 = random_state(b, q, 1.0, seed=3)
    z1 = step(z0, p, s)
    tr = simulate(z0, p, s)
    np.testing.assert_allclose(z1.u.coeffs, tr.u[-1], atol=1e-15)
    np.testing.assert_allclose(z1.eta.values(), tr.final.eta.values(), atol=1e-15)
    assert z0.t == 0.0 and z1.t == pytest.approx(1e-2)


def test_T_zero_single_sample():
    b, q, p, _ = _setup()
    tr = simulate(random_state(b, q, 1.0, 0), p, SchemeConfig(dt=1e-2, T=0.0))
    assert len(tr) == 1


def test_stride_samples_include_end():
    b, q, p, _ = _setup()
    tr = simulate(random_state(b, q, 1.0, 0), p, SchemeConfig(dt=1e-2, T=1.0, stride=30))
    np.testing.assert_allclose(tr.t, [0, 0.3, 0.6, 0.9, 1.0])


def test_history_spacing_must_match():
    b, q, p, _ = _setup(dt=1e-2)
    with pytest.raises(ValueError):
        simulate(random_state(b, q, 1.0, 0), p, SchemeConfig(dt=2e-2, T=0.1))


def test_oracle_rk4_matches_matrix_exponential():
    k = make_exponential(1.0, 1.0)
    x0 = np.array([1.0, 0.5, -0.3, 0.0])
    t, X = single_mode_oracle(4.0, k, x0, 5.0, 0.5, substeps=200)
    A = oracle_matrix(4.0, k)
    for ti, xi in zip(t, X):
        np.testing.assert_allclose(xi, expm(ti * A) @ x0, atol=1e-11)


def test_oracle_spectrum_is_stable():
    A = oracle_matrix(1.0, make_exponential(1.0, 1.0))
    ev = np.roots(np.poly(A))
    assert ev.real.max() < 0
    np.testing.assert_allclose(np.sort_complex(ev), np.sort_complex(np.linalg.eigvals(A)), atol=1e-10)
    _, X = single_mode_oracle(1.0, make_exponential(1.0, 1.0), [1, 0.5, -0.3, 0], 50.0, 0.5)
    assert np.abs(X[-1]).max() < 1e-6
    with pytest.raises(ValueError):
        single_mode_oracle(1.0, _table_kernel(), [1, 0, 0, 0], 1.0, 0.1)


def _table_kernel():
    from thermoplate.kernel import make_table
    s = np.linspace(0, 30, 301)
    return make_table(s, np.exp(-s))


def _oracle_error(dt, scheme, T=2.0):
    b = build_basis(DomainSpec(modes=1))
    k = make_exponential(1.0, 1.0)
    s = SchemeConfig(dt=dt, T=T, scheme=scheme, stride=int(round(0.5 / dt)), tail_tol=1e-12)
    q = s.quadrature(k)
    z0 = StateVector(b.field([1.0]), b.field([0.5]), b.field([-0.3]), HistoryField(q, b))
    tr = simulate(z0, ModelParams(ZERO_F, k), s)
    _, X = single_mode_oracle(1.0, k, [1.0, 0.5, -0.3, 0.0], T, 0.5)
    return np.abs(np.column_stack([tr.u[:, 0], tr.v[:, 0], tr.theta[:, 0]]) - X[:, :3]).max()


def test_temporal_orders():
    r_cn = _oracle_error(2e-2, "imex-cn") / _oracle_error(1e-2, "imex-cn")
    r_1 = _oracle_error(2e-2, "imex1") / _oracle_error(1e-2, "imex1")
    assert 3.5 < r_cn < 4.5
    assert 1.7 < r_1 < 2.3


def test_decompose_linear_case():
    b, q, _, s = _setup(T=2.0)
    d = decompose(random_state(b, q, 1.0, 1), ModelParams(ZERO_F, make_exponential(1.0, 1.0)), s)
    assert np.abs(d.compact.u).max() == 0
    np.testing.assert_array_equal(d.full.u, d.decay.u)
    assert d.max_superposition == 0


def test_decompose_superposition_cubic():
    b, q, p, s = _setup(T=2.0, f=cubic(1.0))
    d = decompose(random_state(b, q, 2.0, 1), p, s)
    assert d.max_superposition < 1e-12
    np.testing.assert_allclose(d.full.u, simulate(random_state(b, q, 2.0, 1), p, s).u, atol=1e-15)


def test_blowup_guard():
    b, q, _, s = _setup(T=20.0, f=Nonlinearity([0.0, 0.0, 0.0, -1.0]))
    p = ModelParams(Nonlinearity([0.0, 0.0, 0.0, -1.0]), make_exponential(1.0, 1.0))
    with pytest.raises(NumericalFailure) as exc:
        simulate(random_state(b, q, 50.0, 0), p, s)
    assert exc.value.t > 0


@settings(max_examples=10)
@given(seed=st.integers(0, 1000))
def test_linear_energy_nonincreasing(seed):
    b, q, p, s = _setup(T=3.0, f=ZERO_F)
    tr = simulate(random_state(b, q, 1.0, seed), p, s)
    N = tr.state_norm_sq(0.0)
    assert np.all(np.diff(N) <= 1e-12 * N[0])


def test_continuous_dependence():
    b, q, p, s = _setup(T=2.0)
    z = random_state(b, q, 1.0, 0)
    w = random_state(b, q, 1.0 + 1e-6, 0)
    gap0 = abs(z.norm() - w.norm())
    d = simulate(z, p, s).state_norm_sq(0.0)
    e = simulate(w, p, s).state_norm_sq(0.0)
    assert np.abs(np.sqrt(d) - np.sqrt(e)).max() < 10 * gap0


def test_nondegenerate_convergence_and_H():
    # beta = 4 lam1^2 makes the nonzero equilibria nondegenerate minimisers
    b, q, _, s = _setup(modes=8, dt=1e-2, T=60.0, stride=10, f=cubic(4.0))
    f = cubic(4.0)
    p = ModelParams(f, make_exponential(1.0, 1.0))
    tr = simulate(random_state(b, q, 1.0, 0), p, s)
    eq = nearest(find_equilibria(b, f), tr.final.u)
    assert eq.nondegenerate and eq.residual <= 1e-10
    ser = dg.energy_series(tr, u_inf=eq.u)
    assert ser.norm_v[-1] + ser.norm_theta[-1] + ser.norm_eta_M1[-1] <= 1e-6
    assert ser.dist_u_V2[-1] <= 1e-4
    aud = dg.coefficient_audit(tr)
    H = dg.H_series(tr, aud.alpha, aud.eps)
    assert aud.max_violation <= 1e-10
    assert abs(H[-1] - energy_E_of_u(eq.u, f)) <= 1e-8
