"""Acceptance checks, one per criterion.

Each check returns a :class:`CheckResult`; :class:`Suite` caches the runs
that several checks share (the demo decomposition, the equilibria).  The
CLI ``verify`` command and the acceptance tests both go through
:func:`run_checks`.
"""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from . import diagnostics as dg
from .config import RunConfig
from .dynamics import (ModelParams, NumericalFailure, SchemeConfig, StateVector, decompose,
                       random_state, simulate, single_mode_oracle, zero_state)
from .history import representation_check
from .kernel import build_quadrature, make_exponential, make_table, verify_assumptions
from .spectral import DomainSpec, build_basis
from .stationary import Nonlinearity, cubic, energy_E_of_u, find_equilibria, gradient, nearest

__all__ = ["CheckResult", "Suite", "CHECKS", "run_checks"]


@dataclass
class CheckResult:
    id: str
    name: str
    passed: Optional[bool]
    value: object
    threshold: object
    detail: str = ""
    seconds: float = 0.0

    def line(self) -> str:
        tag = {True: "PASS", False: "FAIL", None: "SKIP"}[self.passed]
        return f"{tag} {self.id} {self.name}: value={self.value} threshold={self.threshold} {self.detail}".rstrip()

    def to_record(self) -> dict:
        d = asdict(self)
        d["value"] = _jsonable(d["value"])
        d["threshold"] = _jsonable(d["threshold"])
        return d


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    return x


class Suite:
    """Shared state for one configuration."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.basis = cfg.basis()
        self.kernel = cfg.memory_kernel()
        self.f = cfg.nonlinearity()
        self.params = ModelParams(self.f, self.kernel, cfg.c1, cfg.c2, cfg.c3)

    def initial(self, s: SchemeConfig, norm: Optional[float] = None, seed: Optional[int] = None):
        q = s.quadrature(self.kernel)
        return random_state(self.basis, q, self.cfg.init_norm if norm is None else norm,
                            self.cfg.seed if seed is None else seed)

    @cached_property
    def kernel_report(self):
        return verify_assumptions(self.kernel, np.linspace(0.0, 50.0, 5001))

    @cached_property
    def demo_scheme(self) -> SchemeConfig:
        return self.cfg.scheme_config()

    @cached_property
    def demo(self) -> dg.Trajectory:
        return decompose(self.initial(self.demo_scheme), self.params, self.demo_scheme)

    @cached_property
    def equilibria(self):
        guesses = [self.basis.zero()] + [self.basis.mode_field(0, s * a)
                                         for a in self.cfg.guesses for s in (1.0, -1.0)]
        return find_equilibria(self.basis, self.f, guesses)

    @cached_property
    def target(self):
        return nearest(self.equilibria, self.demo.full.final.u)

    @cached_property
    def demo_series(self) -> dg.EnergySeries:
        return dg.energy_series(self.demo.full, u_inf=self.target.u)

    @cached_property
    def companion(self):
        """Run towards a nondegenerate minimiser: ``f = u^3 - 4 lam1^2 u``."""
        f = cubic(4.0 * self.basis.lam1 ** 2)
        p = ModelParams(f, self.kernel, self.cfg.c1, self.cfg.c2, self.cfg.c3)
        s = self.cfg.scheme_config(T=60.0, stride=100)
        tr = simulate(self.initial(s), p, s)
        eqs = find_equilibria(self.basis, f)
        return tr, nearest(eqs, tr.final.u)


def _window_T(T: float, a: float, b: float):
    return (min(a, T), min(b, T))


def check_dissipation(S: Suite) -> CheckResult:
    T = 10.0
    ratios = {}
    sums = {}
    for scheme in ("imex1", "imex-cn"):
        vals = []
        for dt in (1e-2, 5e-3):
            s = SchemeConfig(dt=dt, T=T, scheme=scheme, tail_tol=S.cfg.tail_tol)
            tr = simulate(S.initial(s), S.params, s)
            _, _, tot = dg.dissipation_residual(dg.energy_series(tr), dt, scheme)
            vals.append(tot)
        sums[scheme] = vals
        ratios[scheme] = vals[0] / vals[1]
    frozen = 0.0
    for eq in S.equilibria:
        for scheme in ("imex1", "imex-cn"):
            s = SchemeConfig(dt=1e-2, T=1.0, scheme=scheme, tail_tol=S.cfg.tail_tol)
            z = zero_state(S.basis, s.quadrature(S.kernel))
            z = StateVector(eq.u, z.v, z.theta, z.eta)
            tr = simulate(z, S.params, s)
            R, mx, _ = dg.dissipation_residual(dg.energy_series(tr), s.dt, scheme)
            frozen = max(frozen, mx)
    ok = (1.6 <= ratios["imex1"] <= 2.4 and 3.2 <= ratios["imex-cn"] <= 4.8 and frozen <= 1e-12)
    return CheckResult("C1", "dissipation identity", ok,
                       {"ratio_imex1": ratios["imex1"], "ratio_imex_cn": ratios["imex-cn"],
                        "frozen_max": frozen},
                       {"imex1": [1.6, 2.4], "imex_cn": [3.2, 4.8], "frozen": 1e-12},
                       f"sums={sums}")


def check_oracle(S: Suite) -> CheckResult:
    ker = S.kernel if S.kernel.kind == "exponential" else make_exponential(1.0, 1.0)
    b = build_basis(DomainSpec(1, (S.cfg.sides[0],), 1))
    lam = b.lam1
    dt, T, stride = 1e-4, 10.0, 100
    s = SchemeConfig(dt=dt, T=T, scheme="imex-cn", stride=stride, tail_tol=S.cfg.tail_tol)
    q = s.quadrature(ker)
    x0 = (1.0, 0.5, -0.3)
    z0 = StateVector(b.field([x0[0]]), b.field([x0[1]]), b.field([x0[2]]),
                     zero_state(b, q).eta)
    tr = simulate(z0, ModelParams(Nonlinearity([0.0]), ker), s)
    t, X = single_mode_oracle(lam, ker, (*x0, 0.0), T, stride * dt, substeps=100 * stride)
    num = np.stack([lam * tr.u[:, 0], tr.v[:, 0], tr.theta[:, 0]], axis=1)
    ref = np.stack([lam * X[:, 0], X[:, 1], X[:, 2]], axis=1)
    rel = np.linalg.norm(num - ref, axis=1) / np.linalg.norm(ref, axis=1)
    err = float(rel.max())
    return CheckResult("C2", "single-mode oracle", err <= 1e-6, err, 1e-6,
                       f"M={q.M} samples={t.size}")


def check_superposition(S: Suite) -> CheckResult:
    d = S.demo
    n0 = math.sqrt(d.full.state_norm_sq(0.0)[0])
    val = d.max_superposition / n0 if n0 > 0 else d.max_superposition
    return CheckResult("C3", "discrete superposition", val <= 1e-11, val, 1e-11)


def check_zD_decay(S: Suite) -> CheckResult:
    tr = S.demo.decay
    n = np.sqrt(tr.state_norm_sq(0.0))
    fit = dg.fit_rate(tr.t, n, _window_T(tr.t[-1], 5.0, 50.0))
    ok = fit.exp_r2 >= 0.99 and fit.exp_rate > 0
    return CheckResult("C4", "z_D exponential decay", ok,
                       {"r2": fit.exp_r2, "rate": -fit.exp_rate, "model": fit.model},
                       {"r2": 0.99, "rate": "< 0"})


def check_zC_bounded(S: Suite) -> CheckResult:
    tr = S.demo.compact
    n = np.sqrt(tr.state_norm_sq(1.0))
    i = int(np.argmax(n))
    T = float(tr.t[-1])
    ok = bool(np.all(np.isfinite(n)) and tr.t[i] < 0.5 * T)
    return CheckResult("C5", "z_C V^1 bound", ok, {"sup": float(n[i]), "t_sup": float(tr.t[i])},
                       {"t_sup": f"< {0.5 * T}"})


def check_convergence(S: Suite) -> CheckResult:
    ser = S.demo_series
    kin = float(ser.norm_v[-1] + ser.norm_theta[-1] + ser.norm_eta_M1[-1])
    du = float(ser.dist_u_V2[-1])
    res = S.target.residual
    ok = kin <= 1e-6 and du <= 1e-4 and res <= 1e-10
    detail = ("target nondegenerate" if S.target.nondegenerate
              else "target is a degenerate critical point (zero Jacobian eigenvalue)")
    return CheckResult("C6", "convergence to equilibrium", ok,
                       {"kinetic": kin, "dist_u_V2": du, "target_residual": res},
                       {"kinetic": 1e-6, "dist_u_V2": 1e-4, "target_residual": 1e-10}, detail)


def check_H(S: Suite) -> CheckResult:
    tr = S.demo.full
    pair = S.cfg.functional_pair()
    if pair is None:
        aud = dg.coefficient_audit(tr)
        alpha, eps, n0 = aud.alpha, aud.eps, int(np.searchsorted(tr.t, aud.transient))
    else:
        alpha, eps = pair
        n0 = int(math.ceil(0.05 * (len(tr) - 1)))
    H = dg.H_series(tr, alpha, eps)
    viol = max(dg._monotone_violation(H, n0), 0.0)
    gap = abs(float(H[-1]) - energy_E_of_u(S.target.u, S.f))
    ok = viol <= 1e-10 and gap <= 1e-8
    return CheckResult("C7", "H monotonicity", ok,
                       {"alpha": alpha, "eps": eps, "violation": viol, "H_T_gap": gap},
                       {"violation": 1e-10, "H_T_gap": 1e-8})


def _rate_bound(tr, eq, tail):
    ser = dg.energy_series(tr, u_inf=eq.u)
    probe = dg.ls_probe(tr, eq.u, tail=tail)
    fit = dg.fit_rate(tr.t, ser.dist_V0, probe.window)
    return ser, probe, fit


def check_rate(S: Suite) -> CheckResult:
    tail = S.cfg.fit_tail
    out, ok = {}, True
    tr, eq = S.companion
    runs = [("demo", S.demo.full, S.target), ("nondegenerate", tr, eq)]
    for name, tr, eq in runs:
        ser, probe, fit = _rate_bound(tr, eq, tail)
        rec = {"rho_hat": probe.rho_hat, "model": fit.model, "window": probe.window}
        if eq.nondegenerate:
            good = fit.model == "exponential" and 0.4 <= probe.rho_hat <= 0.5
        else:
            e = probe.rho_hat / (1 - 2 * probe.rho_hat)
            sel = (tr.t >= probe.window[0]) & (tr.t <= probe.window[1])
            prod = ser.dist_V0[sel] * (1 + tr.t[sel]) ** e
            ratio = float(prod.max() / np.median(prod))
            rec["sup_over_median"] = ratio
            good = ratio <= 2.0
        rec["passed"] = good
        out[name] = rec
        ok &= good
    return CheckResult("C8", "rate law", ok, out,
                       {"sup_over_median": 2.0, "rho_hat_nondegenerate": [0.4, 0.5]})


def check_zC_rate(S: Suite) -> CheckResult:
    d, ui = S.demo, S.target.u.coeffs
    lam = S.basis.eigenvalues
    c = d.compact
    dC1 = np.sqrt(np.sum(lam ** 3 * (c.u - ui) ** 2, axis=1)
                  + np.sum(lam * (c.v ** 2 + c.theta ** 2), axis=1) + c.eta["M2"])
    d0 = S.demo_series.dist_V0
    w = dg.signal_window(d.full.t, d0, tail=S.cfg.fit_tail)
    f0 = dg.fit_rate(d.full.t, d0, w)
    f1 = dg.fit_rate(c.t, dC1, w)
    # compare within the model family selected for the full state
    r0 = f0.exp_rate if f0.model == "exponential" else f0.p
    r1 = f1.exp_rate if f0.model == "exponential" else f1.p
    ok = r1 >= 0.95 * r0
    return CheckResult("C9", "z_C sharper rate", ok,
                       {"model": f0.model, "rate_zC_V1": r1, "rate_z_V0": r0, "window": w},
                       {"rate_zC_V1": f">= {0.95 * r0}"})


def check_representation(S: Suite) -> CheckResult:
    s = S.cfg.scheme_config(T=10.0, stride=max(1, int(round(1.0 / S.cfg.dt))))
    d = decompose(S.initial(s), S.params, s, keep_theta=True)
    dev = representation_check(d.compact.final.eta, d.compact.theta_steps, s.dt)
    return CheckResult("C10", "history representation", dev <= 1e-12, dev, 1e-12)


def check_kernel(S: Suite) -> CheckResult:
    out = {}
    rep = S.kernel_report
    h3 = rep.margins["H3"]
    cfg_ok = rep.ok and (S.kernel.kind != "exponential" or h3 <= 0.0)
    out["config_kernel"] = {"passed": rep.passed, "H3_margin": h3}
    s = np.linspace(0.0, 1000.0, 20001)
    power = make_table(s, (1 + s) ** -2.0, -2.0 * (1 + s) ** -3.0)
    prep = verify_assumptions(power, s)
    out["power_kernel_H3"] = prep.passed["H3"]
    ex = make_exponential(1.0, 1.0)
    part = 0.0
    for ds in (0.5, 1e-2, 1e-3):
        q = build_quadrature(ex, ds, 1e-10)
        part = max(part, abs(float(q.weights.sum()) + q.tail - ex.kappa0))
    out["partition_error"] = part
    ok = cfg_ok and not prep.passed["H3"] and part <= 1e-12
    return CheckResult("C11", "kernel validator", ok, out,
                       {"H3_margin": 0.0, "partition": 1e-12})


def check_absorbing(S: Suite) -> CheckResult:
    s = SchemeConfig(dt=5e-3, T=100.0, stride=20, scheme=S.cfg.scheme, tail_tol=S.cfg.tail_tol)
    zs = [S.initial(s, norm=10.0, seed=S.cfg.seed + k) for k in range(8)]
    rep = dg.absorbing_audit(zs, S.params, s)
    ok = rep.ok and all(math.isfinite(e) for e in rep.entry_times)
    return CheckResult("C12", "absorbing set", ok,
                       {"radius": rep.radius, "entry_times": rep.entry_times,
                        "violations": rep.violations}, {"violations": 0})


def check_gradient(S: Suite) -> CheckResult:
    rng = np.random.default_rng(S.cfg.seed)
    lam = S.basis.eigenvalues
    u = S.basis.field(rng.standard_normal(lam.size) / lam ** 2)
    phi = S.basis.field(rng.standard_normal(lam.size) / lam ** 2)
    exact = float(gradient(S.basis, S.f, u.coeffs) @ phi.coeffs)
    hs = (1e-2, 1e-3, 1e-4)
    errs = []
    for h in hs:
        fd = (energy_E_of_u(u + h * phi, S.f) - energy_E_of_u(u - h * phi, S.f)) / (2 * h)
        errs.append(abs(fd - exact))
    orders = [math.log10(a / b) if b > 0 else math.inf for a, b in zip(errs[:-1], errs[1:])]
    ok = all(1.9 <= o <= 2.1 for o in orders)
    return CheckResult("C13", "gradient consistency", ok, {"orders": orders, "errors": errs},
                       {"orders": [1.9, 2.1]})


def check_tail(S: Suite) -> CheckResult:
    tails = S.demo.compact.eta["tails"].max(axis=0)
    mono = bool(np.all(np.diff(tails) <= 0))
    ratio = float(tails[-1] / tails[0]) if tails[0] > 0 else 0.0
    ok = mono and ratio <= 0.1
    return CheckResult("C14", "tail functional", ok,
                       {"sup_tails": tails.tolist(), "ratio_8_1": ratio},
                       {"ratio_8_1": 0.1, "nonincreasing": True})


CHECKS: dict[str, Callable[[Suite], CheckResult]] = {
    "C1": check_dissipation, "C2": check_oracle, "C3": check_superposition,
    "C4": check_zD_decay, "C5": check_zC_bounded, "C6": check_convergence,
    "C7": check_H, "C8": check_rate, "C9": check_zC_rate, "C10": check_representation,
    "C11": check_kernel, "C12": check_absorbing, "C13": check_gradient, "C14": check_tail,
}
NAMES = {k: v.__name__.removeprefix("check_") for k, v in CHECKS.items()}


def run_check(S: Suite, cid: str) -> CheckResult:
    t0 = time.perf_counter()
    try:
        r = CHECKS[cid](S)
    except (NumericalFailure, ValueError, RuntimeError) as exc:
        r = CheckResult(cid, NAMES[cid], False, None, None, f"error: {exc}")
    r.seconds = time.perf_counter() - t0
    return r


def run_checks(cfg: RunConfig, ids=None, on_result=None) -> list[CheckResult]:
    """Run the selected checks; kernel assumptions gate everything that simulates."""
    ids = list(CHECKS) if ids is None else list(ids)
    S = Suite(cfg)
    results = []
    gate = S.kernel_report.ok
    for cid in ids:
        if not gate and cid not in ("C11", "C13"):
            r = CheckResult(cid, NAMES[cid], None, None, None,
                            "skipped: configured kernel fails its assumptions")
        else:
            r = run_check(S, cid)
        results.append(r)
        if on_result:
            on_result(r)
    return results
