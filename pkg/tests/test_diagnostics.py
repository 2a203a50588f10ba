import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from thermoplate import diagnostics as dg
from thermoplate.dynamics import (ModelParams, SchemeConfig, StateVector, decompose,
                                  random_state, simulate, zero_state)
from thermoplate.history import HistoryField, init_history
from thermoplate.kernel import make_exponential
from thermoplate.spectral import DomainSpec, build_basis
from thermoplate.stationary import Nonlinearity, cubic, find_equilibria, nearest

K = make_exponential(1.0, 1.0)


@pytest.fixture(scope="module")
def b8():
    return build_basis(DomainSpec(modes=8))


def _q(dt=1e-2):
    return SchemeConfig(dt=dt).quadrature(K)


def _run(b, f, T=5.0, dt=1e-2, seed=0, norm=1.0, stride=1, scheme="imex-cn"):
    s = SchemeConfig(dt=dt, T=T, stride=stride, scheme=scheme)
    q = s.quadrature(K)
    return simulate(random_state(b, q, norm, seed), ModelParams(f, K), s)


def test_energy_E_single_mode_against_quadrature(b8):
    a, beta = 1.7, 2.0
    f = cubic(beta)
    q = _q()
    z = b8.zero()
    st_ = StateVector(b8.mode_field(0, a), z, z, HistoryField(q, b8))
    phi = lambda x: math.sqrt(2 / math.pi) * math.sin(x)
    pot = quad(lambda x: f.F(a * phi(x)), 0, math.pi)[0]
    assert dg.energy_E(st_, f) == pytest.approx(0.5 * a * a + pot, rel=1e-12)


def test_J_for_constant_past(b8):
    q = _q(1e-3)
    phi = np.zeros(b8.size)
    phi[0] = 1.0
    zf = b8.zero()
    z = StateVector(zf, zf, b8.field(phi), init_history(q, b8, phi))
    # eta(s) = s phi, so J = -int mu(s) s ds |phi|^2 = -kappa0/delta
    assert dg.functional_J(z) == pytest.approx(-1.0, abs=5e-6)


@settings(max_examples=25)
@given(seed=st.integers(0, 10_000))
def test_J_cauchy_schwarz(seed):
    b = build_basis(DomainSpec(modes=4))
    q = _q()
    rng = np.random.default_rng(seed)
    th = rng.standard_normal(b.size)
    eta = HistoryField(q, b, rng.standard_normal((q.M, b.size)))
    zf = b.zero()
    J = dg.functional_J(StateVector(zf, zf, b.field(th), eta))
    omega = q.node_weights.sum()
    assert abs(J) <= math.sqrt(omega * eta.norm_sq(0.0)) * np.linalg.norm(th) * (1 + 1e-12)


def test_H_reduces_to_E(b8):
    q = _q()
    z = random_state(b8, q, 1.0, 0)
    f = cubic(1.0)
    assert dg.functional_H(z, f, 0.0, 0.0) == pytest.approx(dg.energy_E(z, f), rel=1e-13)
    # the cross term alone: eps <A^2 u + f(u), v>_{V^-2}
    d = dg.functional_H(z, f, 0.0, 0.5) - dg.functional_H(z, f, 0.0, 0.0)
    from thermoplate.stationary import gradient
    g = gradient(b8, f, z.u.coeffs)
    assert d == pytest.approx(0.5 * float(np.sum(g * z.v.coeffs / b8.eigenvalues ** 2)), rel=1e-12)


def test_zero_state_functionals(b8):
    q = _q()
    z0 = zero_state(b8, q)
    f = cubic(1.0)
    for val in (dg.energy_E(z0, f), dg.functional_J(z0), dg.functional_H(z0, f, 0.25, 0.1),
                dg.functional_Psi(z0, f, 0.1), dg.functional_Phi(z0, z0, f, 0.1, 0.0),
                dg.functional_y(z0, b8.zero(), f, 0.1),
                dg.functional_Upsilon(z0, z0, b8.zero(), f, 0.1)):
        assert val == 0.0


def test_y_vanishes_at_equilibrium(b8):
    f = cubic(4.0)
    eq = find_equilibria(b8, f)[0]
    zf = b8.zero()
    z = StateVector(eq.u, zf, zf, HistoryField(_q(), b8))
    assert abs(dg.functional_y(z, eq.u, f, 0.1)) < 1e-14


def test_missing_target_errors(b8):
    z = zero_state(b8, _q())
    with pytest.raises(ValueError):
        dg.functional_y(z, None, cubic(1.0), 0.1)
    with pytest.raises(ValueError):
        dg.functional_Upsilon(z, None, b8.zero(), cubic(1.0), 0.1)
    with pytest.raises(ValueError):
        dg.FunctionalConfig(alpha=0.0)


def test_series_agree_with_single_state(b8):
    f = cubic(4.0)
    s = SchemeConfig(dt=1e-2, T=2.0)
    q = s.quadrature(K)
    d = decompose(random_state(b8, q, 1.0, 2), ModelParams(f, K), s)
    full, comp = d.full, d.compact
    zf, zc = full.final, comp.final
    ui = find_equilibria(b8, f)[-1].u
    assert dg.H_series(full, 0.2, 0.05)[-1] == pytest.approx(dg.functional_H(zf, f, 0.2, 0.05), rel=1e-12)
    assert dg.Psi_series(full, 0.1)[-1] == pytest.approx(dg.functional_Psi(zf, f, 0.1), rel=1e-12)
    assert dg.y_series(full, ui, 0.1)[-1] == pytest.approx(dg.functional_y(zf, ui, f, 0.1), rel=1e-12)
    assert dg.Phi_series(comp, full, 0.1, 0.3)[-1] == pytest.approx(
        dg.functional_Phi(zc, zf, f, 0.1, 0.3), rel=1e-12)
    assert dg.Upsilon_series(comp, full, ui, 0.1)[-1] == pytest.approx(
        dg.functional_Upsilon(zc, zf, ui, f, 0.1), rel=1e-12)
    ser = dg.energy_series(full)
    assert ser.E[-1] == pytest.approx(dg.energy_E(zf, f), rel=1e-12)
    assert ser.J[-1] == pytest.approx(dg.functional_J(zf), rel=1e-12)
    assert ser.sample(3).t == pytest.approx(0.03)
    assert np.isnan(ser.dist_V0).all()


def test_dissipation_residual_needs_every_step(b8):
    ser = dg.energy_series(_run(b8, cubic(1.0), T=1.0, stride=5))
    with pytest.raises(ValueError):
        dg.dissipation_residual(ser, 1e-2)


def test_linear_dissipation_residual_shrinks(b8):
    f = Nonlinearity([0.0])
    sums = []
    for dt in (2e-2, 1e-2):
        _, mx, tot = dg.dissipation_residual(dg.energy_series(_run(b8, f, T=2.0, dt=dt)), dt)
        sums.append(tot)
    assert sums[1] < sums[0] / 3


def test_dissipation_integral_tail(b8):
    ser = dg.energy_series(_run(b8, cubic(1.0), T=10.0))
    cum, tail = dg.dissipation_integral(ser)
    assert np.all(np.diff(cum) >= 0) and tail[-1] == 0.0 and tail[0] == cum[-1]


def test_fit_rate_synthetic():
    t = np.linspace(0, 100, 400)
    poly = dg.fit_rate(t, 3.0 * (1 + t) ** -2.0)
    assert poly.model == "polynomial"
    assert poly.p == pytest.approx(2.0, rel=1e-10) and poly.prefactor == pytest.approx(3.0, rel=1e-10)
    assert poly.rho_hat == pytest.approx(2.0 / 5.0)
    ex = dg.fit_rate(t, 2.0 * np.exp(-0.5 * t), window=(10, 60))
    assert ex.model == "exponential" and ex.decay == pytest.approx(0.5, rel=1e-10)
    with pytest.raises(ValueError):
        dg.fit_rate(t, -np.ones_like(t))
    with pytest.raises(ValueError):
        dg.fit_rate(t, np.ones_like(t), window=(200, 300))


def test_signal_window_stops_at_floor():
    t = np.linspace(0, 10, 101)
    v = np.maximum(np.exp(-3 * t), 1e-12)
    lo, hi = dg.signal_window(t, v, floor=1e-9)
    assert hi <= math.log(1e9) / 3 + 0.1 and lo == pytest.approx(hi / 2, abs=0.1)


def test_ls_probe_synthetic():
    d = np.geomspace(1.0, 1e-4, 200)
    t = np.arange(d.size, dtype=float)
    quad_ = dg.ls_probe_arrays(t, d, d * d / 2)
    assert quad_.sigma == pytest.approx(0.5, abs=1e-12) and quad_.rho_hat == 0.5 and quad_.boundary
    p = dg.ls_probe_arrays(t, 2 * d ** 0.7, d)
    assert p.rho_hat == pytest.approx(0.3, abs=1e-12) and not p.boundary
    assert p.constant == pytest.approx(2.0, rel=1e-10)
    with pytest.raises(ValueError):
        dg.ls_probe_arrays(t, d, np.zeros_like(d))


def test_ls_probe_nondegenerate_trajectory(b8):
    f = cubic(4.0)
    tr = _run(b8, f, T=30.0, stride=10)
    eq = nearest(find_equilibria(b8, f), tr.final.u)
    assert 0.4 <= dg.ls_probe(tr, eq.u).rho_hat <= 0.5


def test_absorbing_trivial_and_monotone_radius(b8):
    q = _q()
    p = ModelParams(cubic(1.0), K)
    s = SchemeConfig(dt=1e-2, T=5.0, stride=10)
    rep = dg.absorbing_audit([zero_state(b8, q)] * 2, p, s)
    assert rep.radius == 0 and rep.entry_times == [0.0, 0.0] and rep.ok
    z0 = [random_state(b8, q, 10.0, i) for i in range(3)]
    radii = [dg.absorbing_audit(z0, p, SchemeConfig(dt=1e-2, T=T, stride=10)).radius
             for T in (20.0, 40.0, 80.0)]
    assert radii[0] >= radii[1] >= radii[2]


def test_coefficient_audit(b8):
    tr = _run(b8, Nonlinearity([0.0, 1.0]), T=10.0, stride=5)
    aud = dg.coefficient_audit(tr)
    assert aud.alpha > 0 and aud.eps > 0 and aud.halvings <= 6
    H = dg.H_series(tr, aud.alpha, aud.eps)
    n0 = int(np.searchsorted(tr.t, aud.transient))
    assert np.all(np.diff(H[n0:]) <= 1e-10 * np.abs(H[n0:-1]))
    # a frozen equilibrium keeps H constant, so the first pair is accepted
    frozen = _run(b8, cubic(1.0), T=1.0, norm=0.0)
    assert dg.coefficient_audit(frozen).halvings == 0


def test_psi_bound_holds_on_independent_runs(b8):
    p = ModelParams(cubic(4.0), K)
    s = SchemeConfig(dt=1e-2, T=20.0)
    q = s.quadrature(K)
    runs = [simulate(random_state(b8, q, 10.0, i), p, s) for i in range(12)]
    bound = dg.fit_psi_bound(runs[:4], 0.1, holdout=runs[4:8])
    assert bound.delta0 > 0 and bound.k > 0
    assert max(dg.psi_bound_violation(tr, bound) for tr in runs[8:]) <= 1e-8
