"""Functionals, dissipation residuals, rate fits and audits over sampled runs.

Functionals come in two flavours: single-state versions taking a
:class:`StateVector`, and vectorised ``*_series`` versions over a
:class:`Trajectory` that reuse the history scalars stored at each sample.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from .dynamics import ModelParams, SchemeConfig, StateVector, Trajectory, simulate
from .history import HistoryField
from .spectral import ModalBasis, SpectralField
from .stationary import Nonlinearity

__all__ = [
    "EnergySample", "EnergySeries", "FunctionalConfig", "RateFit", "LSProbe",
    "AbsorbingReport", "AuditResult", "PsiBound",
    "energy_E", "functional_J", "functional_H", "functional_Psi", "functional_Phi",
    "functional_y", "functional_Upsilon",
    "energy_series", "H_series", "Psi_series", "Phi_series", "y_series", "Upsilon_series",
    "dissipation_residual", "fit_rate", "ls_probe", "signal_window", "absorbing_audit",
    "coefficient_audit", "fit_psi_bound", "psi_bound_violation", "dissipation_integral",
]


# pointwise helpers ----------------------------------------------------------

def _grid(basis: ModalBasis, c: np.ndarray) -> np.ndarray:
    return basis.to_grid(c)


def _int_F(basis: ModalBasis, f: Nonlinearity, U: np.ndarray) -> np.ndarray:
    return basis.integrate(f.F(_grid(basis, U)))


def _fk(basis: ModalBasis, f: Nonlinearity, U: np.ndarray) -> np.ndarray:
    return basis.from_grid(f(_grid(basis, U)))


def _taylor_rest(poly, base: np.ndarray, e: np.ndarray, start: int) -> np.ndarray:
    """``sum_{n >= start} poly^(n)(base) e^n / n!`` evaluated by Horner."""
    terms, d, fact = [], poly, 1.0
    for n in range(1, poly.degree() + 1):
        d = d.deriv()
        fact *= n
        terms.append(d(base) / fact if n >= start else None)
    acc = np.zeros(np.broadcast_shapes(base.shape, e.shape))
    for n, c in zip(range(len(terms), 0, -1), reversed(terms)):
        acc = (acc + (c if c is not None else 0.0)) * e
    return acc


def _wsq(c: np.ndarray, lam: np.ndarray, r: float) -> np.ndarray:
    return np.sum(lam ** r * c * c, axis=-1)


# single-state functionals -----------------------------------------------------

def _eta_scalars(eta: HistoryField, theta: np.ndarray) -> dict:
    vals = eta.values()
    lam = eta.basis.eigenvalues
    w = eta.quad.node_weights
    per = (vals * vals) @ np.stack([np.ones_like(lam), lam, lam ** 2], axis=1)
    m0, m1, m2 = w @ per
    return {"M0": m0, "M1": m1, "M2": m2,
            "J": -float(w @ (vals @ theta)), "J1": -float(w @ (vals @ (lam * theta))),
            "pairing": 0.5 * float(eta.quad.node_dweights @ per[:, 1])}


def energy_E(z: StateVector, f: Nonlinearity) -> float:
    """``1/2 ||z||_{V^0}^2 + int F(u)``."""
    return 0.5 * z.norm_sq() + float(_int_F(z.basis, f, z.u.coeffs))


def functional_J(z: StateVector) -> float:
    """``-int mu <theta, eta(s)> ds``."""
    return _eta_scalars(z.eta, z.theta.coeffs)["J"]


@dataclass(frozen=True)
class FunctionalConfig:
    alpha: float = 0.25
    eps_H: float = 1.0 / 16
    eps_Psi: float = 0.1
    eps_Phi: float = 0.1
    eps_y: float = 0.1
    eps_Upsilon: float = 0.1
    k: float = 0.0

    def __post_init__(self):
        for name in ("alpha", "eps_H", "eps_Psi", "eps_Phi", "eps_y", "eps_Upsilon"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


def _H_terms(basis, f, U, V, TH, M1, J, alpha, eps):
    lam = basis.eigenvalues
    grad = lam ** 2 * U + _fk(basis, f, U)
    kin = 0.5 * (_wsq(V, lam, 0) + _wsq(TH, lam, 0) + M1)
    pot = 0.5 * _wsq(U, lam, 2) + _int_F(basis, f, U)
    cross = np.sum(grad * V / lam ** 2, axis=-1)
    return kin + pot + alpha * J + eps * cross


def functional_H(z: StateVector, f: Nonlinearity, alpha: float, eps: float) -> float:
    """``1/2(|v|^2 + |theta|^2 + |eta|_{M^1}^2) + E(u) + alpha J + eps <A^2u + f, v>_{V^-2}``.

    ``alpha = eps = 0`` is allowed here and reduces to :func:`energy_E`.
    """
    s = _eta_scalars(z.eta, z.theta.coeffs)
    return float(_H_terms(z.basis, f, z.u.coeffs, z.v.coeffs, z.theta.coeffs,
                          s["M1"], s["J"], alpha, eps))


def _psi(basis, f, U, V, TH, M1, J, eps):
    lam = basis.eigenvalues
    zz = _wsq(U, lam, 2) + _wsq(V, lam, 0) + _wsq(TH, lam, 0) + M1
    return (0.5 * zz + 0.5 * eps ** 2 * _wsq(U, lam, 1) + _int_F(basis, f, U)
            + eps ** 2 * np.sum(U * V, axis=-1) + 2 * eps * J)


def functional_Psi(z: StateVector, f: Nonlinearity, eps: float) -> float:
    s = _eta_scalars(z.eta, z.theta.coeffs)
    return float(_psi(z.basis, f, z.u.coeffs, z.v.coeffs, z.theta.coeffs, s["M1"], s["J"], eps))


def _phi(basis, f, Uc, Vc, THc, M2c, J1c, U, eps, k):
    lam = basis.eigenvalues
    zc = _wsq(Uc, lam, 3) + _wsq(Vc, lam, 1) + _wsq(THc, lam, 1) + M2c
    fA = np.sum(_fk(basis, f, U) * lam * Uc, axis=-1)
    return (zc + 2 * fA + 2 * eps ** 2 * np.sum(Vc * lam * Uc, axis=-1)
            + eps ** 2 * _wsq(Uc, lam, 2) + 4 * eps * J1c + k)


def functional_Phi(z_C: StateVector, z: StateVector, f: Nonlinearity, eps: float,
                   k: float = 0.0) -> float:
    """Higher-order functional of the compact part; ``f(u)`` uses the full state ``z``."""
    if z is None:
        raise ValueError("Phi needs the full state for its f(u) terms")
    s = _eta_scalars(z_C.eta, z_C.theta.coeffs)
    return float(_phi(z_C.basis, f, z_C.u.coeffs, z_C.v.coeffs, z_C.theta.coeffs,
                      s["M2"], s["J1"], z.u.coeffs, eps, k))


def _y(basis, f, U, V, TH, M1, J, u_inf, eps):
    lam = basis.eigenvalues
    E = U - u_inf
    ug, eg = _grid(basis, u_inf), _grid(basis, E)
    rest = basis.integrate(_taylor_rest(f.F, ug, eg, 2))
    return (0.5 * (_wsq(E, lam, 2) + _wsq(V, lam, 0) + _wsq(TH, lam, 0) + M1)
            + 0.5 * eps ** 2 * _wsq(E, lam, 1) + rest
            + eps ** 2 * np.sum(V * E, axis=-1) + 2 * eps * J)


def functional_y(z: StateVector, u_inf: SpectralField, f: Nonlinearity, eps: float) -> float:
    """Distance-type functional around ``z_inf = (u_inf, 0, 0, 0)``.

    ``F(u) - F(u_inf) - f(u_inf)(u - u_inf)`` is summed as a Taylor remainder
    so the value stays accurate when ``u`` is close to ``u_inf``.
    """
    if u_inf is None:
        raise ValueError("y needs the target equilibrium")
    s = _eta_scalars(z.eta, z.theta.coeffs)
    return float(_y(z.basis, f, z.u.coeffs, z.v.coeffs, z.theta.coeffs, s["M1"], s["J"],
                    u_inf.coeffs, eps))


def _ups(basis, f, Uc, Vc, THc, M2c, J1c, U, u_inf, eps):
    lam = basis.eigenvalues
    Ec = Uc - u_inf
    zc = _wsq(Ec, lam, 3) + _wsq(Vc, lam, 1) + _wsq(THc, lam, 1) + M2c
    df = basis.from_grid(_taylor_rest(f.f, _grid(basis, u_inf), _grid(basis, U - u_inf), 1))
    return (zc + 2 * np.sum(df * lam * Ec, axis=-1)
            + 2 * eps ** 2 * np.sum(Vc * lam * Ec, axis=-1)
            + eps ** 2 * _wsq(Ec, lam, 2) + 4 * eps * J1c)


def functional_Upsilon(z_C: StateVector, z: StateVector, u_inf: SpectralField,
                       f: Nonlinearity, eps: float) -> float:
    if z is None or u_inf is None:
        raise ValueError("Upsilon needs the full state and the target equilibrium")
    s = _eta_scalars(z_C.eta, z_C.theta.coeffs)
    return float(_ups(z_C.basis, f, z_C.u.coeffs, z_C.v.coeffs, z_C.theta.coeffs, s["M2"],
                      s["J1"], z.u.coeffs, u_inf.coeffs, eps))


# series over trajectories ---------------------------------------------------

def _target(tr: Trajectory, u_inf) -> np.ndarray:
    if u_inf is None:
        return None
    return u_inf.coeffs if isinstance(u_inf, SpectralField) else np.asarray(u_inf, float)


def H_series(tr: Trajectory, alpha: float, eps: float) -> np.ndarray:
    return _H_terms(tr.basis, tr.params.f, tr.u, tr.v, tr.theta, tr.eta["M1"], tr.eta["J"],
                    alpha, eps)


def Psi_series(tr: Trajectory, eps: float) -> np.ndarray:
    return _psi(tr.basis, tr.params.f, tr.u, tr.v, tr.theta, tr.eta["M1"], tr.eta["J"], eps)


def Phi_series(comp: Trajectory, full: Trajectory, eps: float, k: float = 0.0) -> np.ndarray:
    return _phi(comp.basis, comp.params.f, comp.u, comp.v, comp.theta, comp.eta["M2"],
                comp.eta["J1"], full.u, eps, k)


def y_series(tr: Trajectory, u_inf, eps: float) -> np.ndarray:
    return _y(tr.basis, tr.params.f, tr.u, tr.v, tr.theta, tr.eta["M1"], tr.eta["J"],
              _target(tr, u_inf), eps)


def Upsilon_series(comp: Trajectory, full: Trajectory, u_inf, eps: float) -> np.ndarray:
    return _ups(comp.basis, comp.params.f, comp.u, comp.v, comp.theta, comp.eta["M2"],
                comp.eta["J1"], full.u, _target(comp, u_inf), eps)


@dataclass(frozen=True)
class EnergySample:
    t: float
    E: float
    grad_v_sq: float
    pairing: float
    residual: float
    J: float
    H: float
    norm_theta: float
    norm_eta_M1: float
    norm_v: float
    stat_residual: float
    dist_V0: float = math.nan
    dist_u_V2: float = math.nan


@dataclass
class EnergySeries:
    """Column arrays of :class:`EnergySample` for one trajectory."""

    t: np.ndarray
    E: np.ndarray
    grad_v_sq: np.ndarray
    pairing: np.ndarray
    residual: np.ndarray
    J: np.ndarray
    H: np.ndarray
    norm_theta: np.ndarray
    norm_eta_M1: np.ndarray
    norm_v: np.ndarray
    stat_residual: np.ndarray
    dist_V0: np.ndarray
    dist_u_V2: np.ndarray

    def __len__(self):
        return self.t.size

    def sample(self, i: int) -> EnergySample:
        return EnergySample(**{k: float(v[i]) for k, v in asdict(self).items()})

    def samples(self):
        return [self.sample(i) for i in range(len(self))]


def energy_series(tr: Trajectory, cfg: Optional[FunctionalConfig] = None,
                  u_inf=None) -> EnergySeries:
    """Per-sample diagnostics; the residual of sample ``i`` covers ``[t_{i-1}, t_i]``."""
    cfg = cfg or FunctionalConfig()
    b, f = tr.basis, tr.params.f
    lam = b.eigenvalues
    E = 0.5 * tr.state_norm_sq(0.0) + _int_F(b, f, tr.u)
    gv = _wsq(tr.v, lam, 1)
    pair = tr.eta["pairing"]
    res = np.zeros_like(E)
    if len(tr) > 1:
        res[1:] = _residuals(tr.t, E, gv - pair, tr.scheme.scheme, tr.scheme.dt)
    grad = lam ** 2 * tr.u + _fk(b, f, tr.u)
    stat = np.sqrt(np.sum(grad * grad / lam ** 2, axis=1))
    ui = _target(tr, u_inf)
    if ui is None:
        dV0 = dV2 = np.full_like(E, math.nan)
    else:
        e = tr.u - ui
        dV2 = np.sqrt(_wsq(e, lam, 2))
        dV0 = np.sqrt(_wsq(e, lam, 2) + _wsq(tr.v, lam, 0) + _wsq(tr.theta, lam, 0)
                      + tr.eta["M1"])
    return EnergySeries(tr.t, E, gv, pair, res, tr.eta["J"], H_series(tr, cfg.alpha, cfg.eps_H),
                        np.sqrt(_wsq(tr.theta, lam, 0)), np.sqrt(tr.eta["M1"]),
                        np.sqrt(_wsq(tr.v, lam, 0)), stat, dV0, dV2)


def _residuals(t, E, D, scheme, dt):
    dts = np.diff(t)
    if scheme == "imex1" and np.allclose(dts, dt, rtol=1e-9, atol=0):
        rate = D[1:]
    else:
        # trapezoid in time: the Crank-Nicolson level, and the fallback for strided series
        rate = 0.5 * (D[1:] + D[:-1])
    return np.diff(E) + dts * rate


def dissipation_residual(series: EnergySeries, dt: float, scheme: str = "imex-cn"):
    """Per-step ``R_n = E_{n+1} - E_n + dt (||A^{1/2}v||^2 - pairing)``.

    imex1 evaluates the rate at level ``n+1``, imex-cn averages levels ``n``
    and ``n+1``.  Returns ``(R, max |R|, sum |R|)``.
    """
    dts = np.diff(series.t)
    if dts.size and not np.allclose(dts, dt, rtol=1e-9, atol=0):
        raise ValueError("dissipation residual needs samples at every step (stride 1)")
    R = _residuals(series.t, series.E, series.grad_v_sq - series.pairing, scheme, dt)
    a = np.abs(R)
    return R, float(a.max(initial=0.0)), float(a.sum())


def dissipation_integral(series: EnergySeries):
    """Running integral of ``||grad v||^2 + ||theta||^2 + ||eta||_{M^1}^2`` and its tail."""
    g = series.grad_v_sq + series.norm_theta ** 2 + series.norm_eta_M1 ** 2
    seg = 0.5 * np.diff(series.t) * (g[1:] + g[:-1])
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    return cum, cum[-1] - cum


# rate fits -----------------------------------------------------------------

@dataclass
class RateFit:
    p: float
    prefactor: float
    r2: float
    window: tuple[float, float]
    rho_hat: float
    exp_rate: float
    exp_prefactor: float
    exp_r2: float
    model: str

    @property
    def decay(self) -> float:
        """Rate of the selected model (exponent or exponential rate)."""
        return self.exp_rate if self.model == "exponential" else self.p


def _linfit(x, y):
    A = np.stack([np.ones_like(x), x], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / ss if ss > 0 else 1.0
    return float(coef[0]), float(coef[1]), r2


def fit_rate(t, values, window: Optional[tuple[float, float]] = None) -> RateFit:
    """Fit ``C (1+t)^-p`` and ``C e^{-r t}``; the model with larger R^2 is reported."""
    t = np.asarray(t, dtype=float)
    v = np.asarray(values, dtype=float)
    if window is None:
        window = (float(t[0]), float(t[-1]))
    sel = (t >= window[0]) & (t <= window[1])
    if sel.sum() < 3:
        raise ValueError("fewer than three samples in the fit window")
    tv, vv = t[sel], v[sel]
    if np.any(vv <= 0) or not np.all(np.isfinite(vv)):
        raise ValueError("values must be positive and finite on the fit window")
    ly = np.log(vv)
    a, b, r2 = _linfit(np.log1p(tv), ly)
    ea, eb, er2 = _linfit(tv, ly)
    p = -b
    rho = p / (1 + 2 * p) if p > 0 else math.nan
    return RateFit(p, math.exp(a), r2, (float(tv[0]), float(tv[-1])), rho,
                   -eb, math.exp(ea), er2, "exponential" if er2 > r2 else "polynomial")


def signal_window(t, values, floor: float = 1e-9, tail: float = 0.5) -> tuple[float, float]:
    """Last ``tail`` fraction of the stretch where ``values`` stay above ``floor``.

    Runs that reach roundoff level plateau there; fits must stop before that.
    """
    t = np.asarray(t, float)
    v = np.asarray(values, float)
    above = np.flatnonzero(v > floor)
    if above.size < 3:
        raise ValueError("no samples above the floor")
    end = int(above[-1])
    start = int(round((1 - tail) * end))
    return float(t[start]), float(t[end])


@dataclass
class LSProbe:
    rho_hat: float
    sigma: float
    constant: float
    r2: float
    n_valid: int
    window: tuple[float, float]
    scatter: float
    boundary: bool


def ls_probe_arrays(t, residual, gap, window=None, min_residual: float = 1e-10,
                    tail: float = 0.5) -> LSProbe:
    """Slope of ``log residual`` against ``log gap`` and the implied exponent ``1 - slope``.

    Without a window the fit uses the last ``tail`` fraction of the samples
    whose residual exceeds ``min_residual`` (roundoff plateaus are dropped).
    """
    t = np.asarray(t, float)
    r = np.asarray(residual, float)
    g = np.abs(np.asarray(gap, float))
    ok = (r > 0) & (g > 0) & np.isfinite(r) & np.isfinite(g)
    if ok.sum() < 3:
        raise ValueError("too few samples with nonzero energy gap")
    if window is None:
        ok &= r > min_residual
        valid = np.flatnonzero(ok)
        if valid.size < 3:
            raise ValueError("too few samples above the roundoff floor")
        lo = valid[int(round((1 - tail) * (valid.size - 1)))]
        window = (float(t[lo]), float(t[valid[-1]]))
    sel = ok & (t >= window[0]) & (t <= window[1])
    if sel.sum() < 3:
        raise ValueError("too few valid samples in the probe window")
    x, y = np.log(g[sel]), np.log(r[sel])
    if np.ptp(x) == 0:
        raise ValueError("constant energy gap on the probe window")
    a, sigma, r2 = _linfit(x, y)
    rho = min(max(1.0 - sigma, 1e-12), 0.5)
    const = float(np.min(r[sel] / g[sel] ** (1 - rho)))
    scatter = float(np.std(y - (a + sigma * x)))
    return LSProbe(rho, sigma, const, r2, int(sel.sum()), window, scatter, rho >= 0.5)


def ls_probe(tr: Trajectory, u_inf, window=None, **kw) -> LSProbe:
    """Lojasiewicz exponent estimate along ``tr`` converging to ``u_inf``."""
    b, f = tr.basis, tr.params.f
    ui = _target(tr, u_inf)
    lam = b.eigenvalues
    grad = lam ** 2 * tr.u + _fk(b, f, tr.u)
    res = np.sqrt(np.sum(grad * grad / lam ** 2, axis=1))
    E = tr.u - ui
    ug, eg = _grid(b, ui), _grid(b, E)
    # energy gap E(u) - E(u_inf) without cancellation
    gap = (np.sum(lam ** 2 * (ui + 0.5 * E) * E, axis=1)
           + b.integrate(_taylor_rest(f.F, ug, eg, 1)))
    return ls_probe_arrays(tr.t, res, gap, window, **kw)


# audits --------------------------------------------------------------------

@dataclass
class AbsorbingReport:
    radius: float
    entry_times: list[float]
    violations: list[int]
    sup_norms: list[float]

    @property
    def ok(self) -> bool:
        return not any(self.violations)


def absorbing_audit(initial: Sequence[StateVector], p: ModelParams, s: SchemeConfig,
                    margin: float = 0.1) -> AbsorbingReport:
    """Common ball from the late-time suprema; entry time and re-exits per trajectory.

    The radius is ``(1 + margin)`` times the largest ``||z||_{V^0}`` seen over
    the second half of the horizon across all runs.
    """
    norms, times = [], []
    for z0 in initial:
        tr = simulate(z0, p, s)
        norms.append(np.sqrt(tr.state_norm_sq(0.0)))
        times.append(tr.t)
    late = [n[t >= 0.5 * t[-1]].max(initial=0.0) for n, t in zip(norms, times)]
    R0 = (1 + margin) * float(max(late, default=0.0))
    entry, viol = [], []
    for n, t in zip(norms, times):
        inside = np.flatnonzero(n <= R0)
        i0 = int(inside[0]) if inside.size else n.size
        entry.append(float(t[i0]) if i0 < n.size else math.inf)
        viol.append(int(np.sum(n[i0:] > R0)))
    return AbsorbingReport(R0, entry, viol, [float(n.max()) for n in norms])


@dataclass
class AuditResult:
    alpha: float
    eps: float
    transient: float
    halvings: int
    max_violation: float


def _monotone_violation(H: np.ndarray, start: int) -> float:
    d = np.diff(H[start:])
    scale = np.abs(H[start:-1])
    if d.size == 0:
        return 0.0
    rel = d / np.maximum(scale, np.finfo(float).tiny)
    return float(rel.max())


def coefficient_audit(probe: Trajectory, start=(0.25, 1.0 / 16), floor: float = 2.0 ** -20,
                      transient: float = 0.05, tol: float = 1e-10) -> AuditResult:
    """Halve ``(alpha, eps)`` together until ``H`` is nonincreasing along ``probe``."""
    alpha, eps = start
    n0 = int(math.ceil(transient * (len(probe) - 1)))
    halvings = 0
    while alpha >= floor and eps >= floor:
        H = H_series(probe, alpha, eps)
        v = _monotone_violation(H, n0)
        if v <= tol:
            return AuditResult(alpha, eps, float(probe.t[n0]), halvings, max(v, 0.0))
        alpha, eps = 0.5 * alpha, 0.5 * eps
        halvings += 1
    raise RuntimeError("no (alpha, eps) down to the search floor makes H nonincreasing")


@dataclass
class PsiBound:
    delta0: float
    k: float
    eps: float


def _psi_rate(tr: Trajectory, eps: float):
    P = Psi_series(tr, eps)
    dP = np.diff(P) / np.diff(tr.t)
    z2 = tr.state_norm_sq(0.0)
    return dP, 0.5 * (z2[1:] + z2[:-1])


def fit_psi_bound(runs: Sequence[Trajectory] | Trajectory, eps: float,
                  candidates: np.ndarray = np.geomspace(1e-4, 10.0, 101),
                  holdout: Sequence[Trajectory] = (), tol: float = 1e-8) -> PsiBound:
    """``dPsi/dt + delta0 ||z||^2 <= k`` fitted on pooled ``runs``.

    For each candidate ``delta0`` the constant ``k`` is the pooled maximum.
    The pair with the smallest ``k / delta0`` is returned, restricted to pairs
    that ``holdout`` runs violate by at most ``tol`` (relative) when given.
    """
    runs = [runs] if isinstance(runs, Trajectory) else list(runs)
    rates = [_psi_rate(tr, eps) for tr in runs]
    best = None
    for d in candidates:
        k = max(float(np.max(dP + d * z2)) for dP, z2 in rates)
        if not k > 0:
            continue
        cand = PsiBound(float(d), k, eps)
        if any(psi_bound_violation(tr, cand) > tol for tr in holdout):
            continue
        if best is None or k / d < best.k / best.delta0:
            best = cand
    if best is None:
        raise ValueError("no candidate delta0 gives a positive k satisfied on the holdout runs")
    return best


def psi_bound_violation(tr: Trajectory, bound: PsiBound) -> float:
    """Largest relative excess of ``dPsi/dt + delta0 ||z||^2`` over ``k`` on ``tr``."""
    dP, z2 = _psi_rate(tr, bound.eps)
    excess = dP + bound.delta0 * z2 - bound.k
    return float(excess.max(initial=-math.inf)) / max(abs(bound.k), 1e-300)
