"""Time integration of the coupled plate/heat/history system in the sine basis.

Per mode ``k`` (eigenvalue ``lam``) the system reads::

    u'     = v
    v'     = -lam v - lam^2 u + lam theta - f_k(u)
    theta' = -lam v - (lam + c3) m - c1 theta - c2 lam theta
    eta_t + eta_s = theta,    m = int mu eta ds

The linear block in ``(u, v, theta)`` is solved implicitly.  The memory
integral at the new level is affine in the new temperature,
``m^{n+1} = S^n + Omega dt/2 (theta^n + theta^{n+1})``, so it is folded into
the same 3x3 solve; only ``f`` is explicit (frozen for ``imex1``, two-step
extrapolation for ``imex-cn``).  Every step is an affine map of the state,
which is what makes the ``z = z_D + z_C`` superposition exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .history import HistoryField, init_history
from .kernel import KernelQuadrature, MemoryKernel, build_quadrature
from .spectral import ModalBasis, SpectralField
from .stationary import Nonlinearity

__all__ = [
    "NumericalFailure",
    "StateVector",
    "ModelParams",
    "SchemeConfig",
    "Propagator",
    "Trajectory",
    "Decomposition",
    "step",
    "simulate",
    "decompose",
    "single_mode_oracle",
    "random_state",
    "zero_state",
]

SCHEMES = ("imex1", "imex-cn")
BLOWUP = 1e6


class NumericalFailure(RuntimeError):
    def __init__(self, t: float, message: str):
        super().__init__(f"t={t:.6g}: {message}")
        self.t = t


@dataclass
class StateVector:
    u: SpectralField
    v: SpectralField
    theta: SpectralField
    eta: HistoryField
    t: float = 0.0

    @property
    def basis(self) -> ModalBasis:
        return self.u.basis

    def copy(self) -> "StateVector":
        return StateVector(self.u, self.v, self.theta, self.eta.copy(), self.t)

    def norm_sq(self, r: float = 0.0) -> float:
        """``||z||^2`` in the product space of order ``r``."""
        lam = self.basis.eigenvalues
        return float(np.sum(lam ** (2 + r) * self.u.coeffs ** 2)
                     + np.sum(lam ** r * (self.v.coeffs ** 2 + self.theta.coeffs ** 2))
                     + self.eta.norm_sq(1 + r))

    def norm(self, r: float = 0.0) -> float:
        return math.sqrt(self.norm_sq(r))


@dataclass(frozen=True)
class ModelParams:
    f: Nonlinearity
    kernel: MemoryKernel
    c1: float = 0.0
    c2: float = 0.0
    c3: float = 0.0

    def __post_init__(self):
        if min(self.c1, self.c2, self.c3) < 0:
            raise ValueError("generalized-law coefficients must be nonnegative")

    def check(self, basis: ModalBasis) -> None:
        if not self.f.satisfies_f2(basis.C_omega):
            raise ValueError(f"{self.f} violates the dissipativity condition (F2)")


@dataclass(frozen=True)
class SchemeConfig:
    dt: float
    T: float = 0.0
    scheme: str = "imex-cn"
    stride: int = 1
    tail_tol: float = 1e-10

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.stride < 1 or int(self.stride) != self.stride:
            raise ValueError("stride must be a positive integer")
        if self.T < 0:
            raise ValueError("T must be nonnegative")
        n = self.T / self.dt
        if abs(n - round(n)) > 1e-9 * max(1.0, n):
            raise ValueError(f"T={self.T} is not a multiple of dt={self.dt}")

    @property
    def steps(self) -> int:
        return int(round(self.T / self.dt))

    def quadrature(self, kernel: MemoryKernel) -> KernelQuadrature:
        return build_quadrature(kernel, self.dt, self.tail_tol)


def zero_state(basis: ModalBasis, quad: KernelQuadrature) -> StateVector:
    z = basis.zero()
    return StateVector(z, z, z, HistoryField(quad, basis))


def random_state(basis: ModalBasis, quad: KernelQuadrature, norm: float, seed: int,
                 decay: float = 2.0, phi=None) -> StateVector:
    """Band-limited state with amplitudes ``~ lam**-decay`` scaled to ``||z||_V0 = norm``."""
    rng = np.random.default_rng(seed)
    amp = basis.eigenvalues ** -decay
    u, v, th = (rng.standard_normal(basis.size) * amp for _ in range(3))
    eta = init_history(quad, basis, phi)
    z = StateVector(basis.field(u), basis.field(v), basis.field(th), eta)
    n0 = z.norm()
    if n0 == 0:
        return z
    s = norm / n0
    vals = eta.values() * s
    return StateVector(basis.field(s * u), basis.field(s * v), basis.field(s * th),
                       HistoryField(quad, basis, vals))


class Propagator:
    """Precomputed per-mode affine update for one scheme and step size."""

    def __init__(self, basis: ModalBasis, quad: KernelQuadrature, params: ModelParams,
                 scheme: SchemeConfig):
        if not math.isclose(scheme.dt, quad.ds, rel_tol=1e-12):
            raise ValueError(f"dt={scheme.dt} must equal the history spacing ds={quad.ds}")
        self.basis, self.quad, self.params, self.scheme = basis, quad, params, scheme
        h = scheme.dt
        lam = basis.eigenvalues
        K = lam.size
        g = lam + params.c3
        om = float(quad.node_weights.sum())
        damp = params.c1 + params.c2 * lam
        Mm = np.zeros((K, 3, 3))
        Rm = np.zeros((K, 3, 3))
        if scheme.scheme == "imex1":
            a = h
            Rm[:, 0, 0] = 1.0
            Rm[:, 1, 1] = 1.0
            Rm[:, 2, 2] = 1.0 - h * g * om * 0.5 * h
            self._alpha_S, self._alpha_m = -h, 0.0
        else:
            a = 0.5 * h
            Rm[:, 0, 0] = 1.0
            Rm[:, 0, 1] = a
            Rm[:, 1, 0] = -a * lam ** 2
            Rm[:, 1, 1] = 1.0 - a * lam
            Rm[:, 1, 2] = a * lam
            Rm[:, 2, 1] = -a * lam
            Rm[:, 2, 2] = 1.0 - a * damp - a * g * om * 0.5 * h
            self._alpha_S, self._alpha_m = -a, -a
        Mm[:, 0, 0] = 1.0
        Mm[:, 0, 1] = -a
        Mm[:, 1, 0] = a * lam ** 2
        Mm[:, 1, 1] = 1.0 + a * lam
        Mm[:, 1, 2] = -a * lam
        Mm[:, 2, 1] = a * lam
        Mm[:, 2, 2] = 1.0 + a * damp + a * g * om * 0.5 * h
        Minv = np.linalg.inv(Mm)
        if not np.all(np.isfinite(Minv)):
            raise NumericalFailure(0.0, "singular per-mode linear system")
        self.P = Minv @ Rm
        self.Gv = -h * Minv[:, :, 1]
        self.Gt = Minv[:, :, 2]
        self.g = g
        self.h = h
        self.two_step = scheme.scheme == "imex-cn"

    def forcing(self, u: np.ndarray) -> np.ndarray:
        f = self.params.f
        if f.is_zero:
            return np.zeros_like(u)
        b = self.basis
        return b.from_grid(f(b.to_grid(u)))

    def advance(self, x: np.ndarray, hist: HistoryField, F: Optional[np.ndarray]) -> np.ndarray:
        """Map ``x = (u, v, theta)`` stacked as ``(K, 3)`` one step; mutates ``hist``."""
        S = hist.shifted_memory()
        s = self.g * (self._alpha_S * S + self._alpha_m * hist.memory)
        x1 = np.einsum("kij,kj->ki", self.P, x) + self.Gt * s[:, None]
        if F is not None:
            x1 += self.Gv * F[:, None]
        hist.push(0.5 * self.h * (x[:, 2] + x1[:, 2]), shifted=S)
        return x1


def _stack(z: StateVector) -> np.ndarray:
    return np.stack([z.u.coeffs, z.v.coeffs, z.theta.coeffs], axis=1)


def _unstack(basis: ModalBasis, x: np.ndarray, eta: HistoryField, t: float) -> StateVector:
    return StateVector(basis.field(x[:, 0]), basis.field(x[:, 1]), basis.field(x[:, 2]), eta, t)


def step(z: StateVector, p: ModelParams, s: SchemeConfig) -> StateVector:
    """One step from ``z`` (explicit ``f`` frozen at ``z.u``); ``z`` is not modified."""
    prop = Propagator(z.basis, z.eta.quad, p, s)
    hist = z.eta.copy()
    x = _stack(z)
    x1 = prop.advance(x, hist, prop.forcing(x[:, 0]))
    if not np.all(np.isfinite(x1)):
        bad = int(np.flatnonzero(~np.isfinite(x1).all(axis=1))[0])
        raise NumericalFailure(z.t + s.dt, f"non-finite value in mode {bad}")
    return _unstack(z.basis, x1, hist, z.t + s.dt)


TAIL_YS = (1.0, 2.0, 4.0, 8.0)


@dataclass
class Trajectory:
    """Sampled run: modal arrays plus history-derived scalars at each sample."""

    basis: ModalBasis
    quad: KernelQuadrature
    params: ModelParams
    scheme: SchemeConfig
    t: np.ndarray
    u: np.ndarray
    v: np.ndarray
    theta: np.ndarray
    eta: dict[str, np.ndarray]
    final: StateVector
    theta_steps: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return self.t.size

    def state_norm_sq(self, r: float = 0.0) -> np.ndarray:
        lam = self.basis.eigenvalues
        key = {0.0: "M1", 1.0: "M2", -1.0: "M0"}[float(r)]
        return (np.sum(lam ** (2 + r) * self.u ** 2, axis=1)
                + np.sum(lam ** r * (self.v ** 2 + self.theta ** 2), axis=1)
                + self.eta[key])

    def field(self, name: str, i: int) -> SpectralField:
        return self.basis.field(getattr(self, name)[i])


class _Recorder:
    def __init__(self, basis: ModalBasis, quad: KernelQuadrature, n: int,
                 keep_theta: bool = False, total_steps: int = 0):
        K = basis.size
        self.lam = basis.eigenvalues
        self.quad = quad
        self.t = np.zeros(n)
        self.x = np.zeros((n, K, 3))
        self.keys = ("M0", "M1", "M2", "J", "J1", "pairing", "memory_sq")
        self.eta = {k: np.zeros(n) for k in self.keys}
        self.tails = np.zeros((n, len(TAIL_YS)))
        self.tail_bound = np.zeros(n)
        self.i = 0
        s = quad.nodes
        w = quad.node_weights
        self._tail_w = np.stack([w * ~((s > 1.0 / y) & (s < y)) for y in TAIL_YS])
        self._pw = np.stack([np.ones_like(self.lam), self.lam, self.lam ** 2], axis=1)
        self.theta_steps = np.zeros((total_steps + 1, K)) if keep_theta else None

    def record(self, t: float, x: np.ndarray, hist: HistoryField) -> np.ndarray:
        """Store sample ``i``; returns the materialised history values for reuse."""
        i = self.i
        self.t[i] = t
        self.x[i] = x
        eta = hist.values()
        per = (eta * eta) @ self._pw
        w, dw = self.quad.node_weights, self.quad.node_dweights
        d = self.eta
        d["M0"][i], d["M1"][i], d["M2"][i] = w @ per
        mem = w @ eta
        th = x[:, 2]
        # J = -sum_j w_j <theta, eta_j> = -<theta, memory>
        d["J"][i] = -float(mem @ th)
        d["J1"][i] = -float(mem @ (self.lam * th))
        d["pairing"][i] = 0.5 * float(dw @ per[:, 1])
        d["memory_sq"][i] = float(np.sum(self.lam * mem * mem))
        self.tails[i] = self._tail_w @ per[:, 1]
        self.tail_bound[i] = self.quad.tail * float(per[:, 1].max(initial=0.0))
        self.i += 1
        return eta

    def finish(self, basis, quad, params, scheme, final) -> Trajectory:
        eta = dict(self.eta)
        eta["tails"] = self.tails
        eta["tail_bound"] = self.tail_bound
        return Trajectory(basis, quad, params, scheme, self.t.copy(), self.x[:, :, 0].copy(),
                          self.x[:, :, 1].copy(), self.x[:, :, 2].copy(), eta, final,
                          self.theta_steps)


def _check(t: float, x: np.ndarray, bound: float, norm_sq: float) -> None:
    if not np.all(np.isfinite(x)):
        bad = int(np.flatnonzero(~np.isfinite(x).all(axis=1))[0])
        raise NumericalFailure(t, f"non-finite value in mode {bad}")
    if bound > 0 and norm_sq > bound:
        raise NumericalFailure(t, "state norm exceeded the blow-up guard")


def _samples(s: SchemeConfig) -> int:
    return s.steps // s.stride + 1 + (1 if s.steps % s.stride else 0)


def simulate(z0: StateVector, p: ModelParams, s: SchemeConfig,
             keep_theta: bool = False) -> Trajectory:
    """Integrate from ``z0`` to ``s.T``; samples every ``s.stride`` steps and at the end."""
    basis, quad = z0.basis, z0.eta.quad
    prop = Propagator(basis, quad, p, s)
    hist = z0.eta.copy()
    x = _stack(z0)
    rec = _Recorder(basis, quad, _samples(s), keep_theta, s.steps)
    rec.record(z0.t, x, hist)
    if keep_theta:
        rec.theta_steps[0] = x[:, 2]
    bound = (BLOWUP ** 2) * z0.norm_sq()
    F_prev = None
    n = s.steps
    for k in range(1, n + 1):
        F = prop.forcing(x[:, 0]) if not p.f.is_zero else None
        Fs = F
        if F is not None and prop.two_step and F_prev is not None:
            Fs = 1.5 * F - 0.5 * F_prev
        F_prev = F
        x = prop.advance(x, hist, Fs)
        if keep_theta:
            rec.theta_steps[k] = x[:, 2]
        if k % s.stride == 0 or k == n:
            t = z0.t + k * s.dt
            rec.record(t, x, hist)
            _check(t, x, bound, _norm_sq(basis, x, rec.eta["M1"][rec.i - 1]))
    final = _unstack(basis, x, hist, z0.t + n * s.dt)
    return rec.finish(basis, quad, p, s, final)


def _norm_sq(basis: ModalBasis, x: np.ndarray, eta_sq: float) -> float:
    lam = basis.eigenvalues
    return float(np.sum(lam ** 2 * x[:, 0] ** 2) + np.sum(x[:, 1:] ** 2) + eta_sq)


@dataclass
class Decomposition:
    full: Trajectory
    decay: Trajectory
    compact: Trajectory
    superposition: np.ndarray = field(repr=False)

    @property
    def max_superposition(self) -> float:
        return float(self.superposition.max(initial=0.0))


def decompose(z0: StateVector, p: ModelParams, s: SchemeConfig,
              keep_theta: bool = False) -> Decomposition:
    """Run ``z``, ``z_D`` (unforced, from ``z0``) and ``z_C`` (forced by ``f(u)``, from 0) in lockstep."""
    basis, quad = z0.basis, z0.eta.quad
    prop = Propagator(basis, quad, p, s)
    hists = [z0.eta.copy(), z0.eta.copy(), HistoryField(quad, basis)]
    xs = [_stack(z0), _stack(z0), np.zeros((basis.size, 3))]
    ns = _samples(s)
    recs = [_Recorder(basis, quad, ns, keep_theta and i == 2, s.steps) for i in range(3)]
    sup = np.zeros(ns)
    lam = basis.eigenvalues
    w = quad.node_weights

    def sample(t, isamp):
        etas = [r.record(t, x, h) for r, x, h in zip(recs, xs, hists)]
        dx = xs[0] - xs[1] - xs[2]
        de = etas[0] - etas[1] - etas[2]
        sup[isamp] = math.sqrt(float(np.sum(lam ** 2 * dx[:, 0] ** 2) + np.sum(dx[:, 1:] ** 2)
                                     + w @ ((de * de) @ lam)))

    sample(z0.t, 0)
    if keep_theta:
        recs[2].theta_steps[0] = xs[2][:, 2]
    bound = (BLOWUP ** 2) * z0.norm_sq()
    F_prev = None
    isamp = 1
    n = s.steps
    for k in range(1, n + 1):
        F = prop.forcing(xs[0][:, 0]) if not p.f.is_zero else None
        Fs = F
        if F is not None and prop.two_step and F_prev is not None:
            Fs = 1.5 * F - 0.5 * F_prev
        F_prev = F
        xs[0] = prop.advance(xs[0], hists[0], Fs)
        xs[1] = prop.advance(xs[1], hists[1], None)
        xs[2] = prop.advance(xs[2], hists[2], Fs)
        if keep_theta:
            recs[2].theta_steps[k] = xs[2][:, 2]
        if k % s.stride == 0 or k == n:
            t = z0.t + k * s.dt
            sample(t, isamp)
            isamp += 1
            _check(t, xs[0], bound, _norm_sq(basis, xs[0], recs[0].eta["M1"][recs[0].i - 1]))
    tend = z0.t + n * s.dt
    trajs = [r.finish(basis, quad, p, s, _unstack(basis, x, h, tend))
             for r, x, h in zip(recs, xs, hists)]
    return Decomposition(*trajs, sup)


def single_mode_oracle(lam: float, kernel: MemoryKernel, x0, T: float, sample_dt: float,
                       substeps: int = 100):
    """Reference solution of the closed four-equation reduction for one mode.

    With ``mu = kappa0 delta exp(-delta s)`` and ``f = 0`` the memory integral
    ``w = int mu eta ds`` obeys ``w' = kappa0 theta - delta w``.  The system
    ``(u, v, theta, w)`` is linear, so the classical RK4 step at
    ``h = sample_dt / substeps`` is the matrix polynomial ``R(hA)``; its powers
    reproduce the RK4 iterates exactly.

    Returns ``(t, X)`` with ``X[i] = (u, v, theta, w)`` at ``t[i]``.
    """
    if kernel.kind != "exponential":
        raise ValueError("the reduction needs an exponential kernel")
    A = oracle_matrix(lam, kernel)
    h = sample_dt / substeps
    hA = h * A
    R = np.eye(4)
    term = np.eye(4)
    for j in range(1, 5):
        term = term @ hA / j
        R = R + term
    step_mat = np.linalg.matrix_power(R, substeps)
    n = int(round(T / sample_dt))
    X = np.zeros((n + 1, 4))
    X[0] = np.asarray(x0, dtype=float)
    for i in range(n):
        X[i + 1] = step_mat @ X[i]
    return sample_dt * np.arange(n + 1), X


def oracle_matrix(lam: float, kernel: MemoryKernel) -> np.ndarray:
    k0, d = kernel.kappa0, kernel.delta
    return np.array([
        [0.0, 1.0, 0.0, 0.0],
        [-lam ** 2, -lam, lam, 0.0],
        [0.0, -lam, 0.0, -lam],
        [0.0, 0.0, k0, -d],
    ])
