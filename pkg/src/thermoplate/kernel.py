"""Memory kernels ``mu = -kappa'`` and their exact cell quadratures on the age axis."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "MemoryKernel",
    "KernelQuadrature",
    "AssumptionReport",
    "make_exponential",
    "make_table",
    "load_table",
    "verify_assumptions",
    "build_quadrature",
]


@dataclass(frozen=True, eq=False)
class MemoryKernel:
    """Either ``mu(s) = kappa0 * delta * exp(-delta s)`` or a sampled table.

    Table kernels are the piecewise-linear interpolant of ``(s, mu)`` and
    vanish beyond the last sample; ``dmu`` holds the sampled derivative.
    """

    kind: str
    kappa0: float
    delta: float | None = None
    s: np.ndarray | None = field(default=None, repr=False)
    mu_samples: np.ndarray | None = field(default=None, repr=False)
    dmu_samples: np.ndarray | None = field(default=None, repr=False)

    def mu(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if self.kind == "exponential":
            return self.kappa0 * self.delta * np.exp(-self.delta * s)
        return np.interp(s, self.s, self.mu_samples, right=0.0)

    def dmu(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if self.kind == "exponential":
            return -self.delta * self.mu(s)
        return np.interp(s, self.s, self.dmu_samples, right=0.0)

    def mass(self, a: float, b: float = math.inf) -> float:
        """``int_a^b mu``."""
        if self.kind == "exponential":
            d = self.delta
            hi = 0.0 if math.isinf(b) else math.exp(-d * b)
            return self.kappa0 * (math.exp(-d * a) - hi)
        return float(self._cumulative(np.array([min(b, self.s[-1])]))[0]
                     - self._cumulative(np.array([min(a, self.s[-1])]))[0])

    def _cumulative(self, x: np.ndarray) -> np.ndarray:
        # exact integral of the piecewise-linear interpolant from s[0]
        s, m = self.s, self.mu_samples
        seg = 0.5 * (m[1:] + m[:-1]) * np.diff(s)
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        x = np.clip(x, s[0], s[-1])
        i = np.clip(np.searchsorted(s, x, side="right") - 1, 0, s.size - 2)
        dx = x - s[i]
        slope = (m[i + 1] - m[i]) / (s[i + 1] - s[i])
        return cum[i] + m[i] * dx + 0.5 * slope * dx * dx


def make_exponential(kappa0: float, delta: float) -> MemoryKernel:
    if not (kappa0 > 0 and delta > 0):
        raise ValueError(f"kappa0 and delta must be positive, got {kappa0}, {delta}")
    return MemoryKernel("exponential", float(kappa0), float(delta))


def make_table(s, mu, dmu=None, delta: float | None = None) -> MemoryKernel:
    """Table kernel from samples; ``dmu`` defaults to a second-order difference."""
    s = np.asarray(s, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if s.ndim != 1 or s.shape != mu.shape or s.size < 2:
        raise ValueError("need matching 1-D sample arrays with at least two nodes")
    if np.any(np.diff(s) <= 0):
        raise ValueError("s samples must be strictly increasing")
    if s[0] < 0:
        raise ValueError("s samples must be nonnegative")
    dmu = np.gradient(mu, s, edge_order=2) if dmu is None else np.asarray(dmu, float)
    for a in (s, mu, dmu):
        a.setflags(write=False)
    seg = 0.5 * (mu[1:] + mu[:-1]) * np.diff(s)
    return MemoryKernel("table", float(seg.sum()), delta, s, mu, dmu)


def load_table(path: str | Path, delta: float | None = None) -> MemoryKernel:
    """Read a whitespace-separated two-column ``s mu(s)`` file."""
    data = np.loadtxt(path, dtype=float, ndmin=2)
    if data.shape[1] != 2:
        raise ValueError(f"{path}: expected two columns, got {data.shape[1]}")
    return make_table(data[:, 0], data[:, 1], delta=delta)


@dataclass
class AssumptionReport:
    """Pass/fail and worst-case margin for each kernel assumption."""

    passed: dict[str, bool]
    margins: dict[str, float]
    delta: float | None
    offending: dict[str, list[float]]

    @property
    def ok(self) -> bool:
        return all(self.passed.values())


def _largest_delta(mu: np.ndarray, dmu: np.ndarray, candidates: np.ndarray) -> float:
    """Largest ``d`` with ``mu' + d mu <= 0`` on the samples: sweep, then bisect."""
    tol = 1e-12 * np.abs(mu).max()
    admissible = lambda d: bool(np.all(dmu + d * mu <= tol))
    ok = [i for i, d in enumerate(candidates) if admissible(d)]
    if not ok:
        return 0.0
    i = ok[-1]
    if i == len(candidates) - 1:
        return float(candidates[i])
    lo, hi = float(candidates[i]), float(candidates[i + 1])
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if admissible(mid) else (lo, mid)
    return lo


def verify_assumptions(kernel: MemoryKernel, s_grid, delta: float | None = None,
                       tol: float = 1e-12) -> AssumptionReport:
    """Check (H1)-(H4) on ``s_grid``.

    Without a stored or supplied ``delta`` the largest admissible value on a
    logarithmic sweep is searched on the full grid and on its first half; a
    uniform constant must survive extending the grid, otherwise (H3) fails.
    """
    s = np.asarray(s_grid, dtype=float)
    if s.ndim != 1 or s.size < 4 or np.any(np.diff(s) <= 0):
        raise ValueError("s_grid must be strictly increasing with at least 4 nodes")
    mu, dmu = kernel.mu(s), kernel.dmu(s)
    passed, margins, offending = {}, {}, {}

    l1 = float(np.trapezoid(np.abs(mu), s) + np.trapezoid(np.abs(dmu), s))
    passed["H1"] = bool(np.isfinite(l1) and np.all(np.isfinite(mu)) and np.all(np.isfinite(dmu)))
    margins["H1"] = l1

    bad = (mu < -tol) | (dmu > tol)
    passed["H2"] = not bool(bad.any())
    margins["H2"] = float(max(-mu.min(), dmu.max()))
    offending["H2"] = s[bad].tolist()

    d = delta if delta is not None else kernel.delta
    if d is not None:
        gap = dmu + d * mu
        margins["H3"] = float(gap.max())
        passed["H3"] = bool(d > 0 and margins["H3"] <= tol * max(1.0, float(np.abs(mu).max())))
        offending["H3"] = s[gap > tol].tolist()
    else:
        cand = np.logspace(-6, 3, 361)
        full = _largest_delta(mu, dmu, cand)
        half = _largest_delta(mu[: s.size // 2], dmu[: s.size // 2], cand)
        d = full
        margins["H3"] = float((dmu + full * mu).max()) if full > 0 else float(dmu.max())
        # no uniform constant if the admissible delta keeps shrinking with the grid
        passed["H3"] = bool(full > 0 and full >= 0.9 * half)
        offending["H3"] = [] if passed["H3"] else [float(s[-1])]

    margins["H4"] = kernel.kappa0
    passed["H4"] = kernel.kappa0 > 0
    return AssumptionReport(passed, margins, d, offending)


@dataclass(frozen=True, eq=False)
class KernelQuadrature:
    """Cell and node weights for ``mu``-weighted integrals on ``s_j = j ds``.

    ``weights[j-1] = int_{(j-1)ds}^{j ds} mu`` are exact cell integrals and
    ``dweights`` likewise for ``mu'``.  Integrals against a field stored at
    the nodes use the trapezoidal rule inside every cell, which gives the
    node weights ``node_weights[j-1] = (w_j + w_{j+1}) / 2`` (``w_M / 2`` for
    the last node); node 0 carries ``w_1 / 2`` but the field vanishes there.
    """

    kernel: MemoryKernel
    ds: float
    M: int
    weights: np.ndarray
    dweights: np.ndarray
    tail: float
    node_weights: np.ndarray
    node_dweights: np.ndarray
    ratio: float | None

    @property
    def horizon(self) -> float:
        return self.M * self.ds

    @property
    def nodes(self) -> np.ndarray:
        return self.ds * np.arange(1, self.M + 1)

    @property
    def kappa0(self) -> float:
        return self.kernel.kappa0


def _node(w: np.ndarray) -> np.ndarray:
    out = 0.5 * w.copy()
    out[:-1] += 0.5 * w[1:]
    return out


def build_quadrature(kernel: MemoryKernel, ds: float, tail_tol: float) -> KernelQuadrature:
    if not ds > 0:
        raise ValueError(f"ds must be positive, got {ds}")
    if not 0 < tail_tol < kernel.kappa0:
        raise ValueError(f"tail_tol must lie in (0, kappa0={kernel.kappa0}), got {tail_tol}")
    if kernel.kind == "exponential":
        k0, d = kernel.kappa0, kernel.delta
        M = max(2, math.ceil(math.log(k0 / tail_tol) / (d * ds)))
        while M > 2 and k0 * math.exp(-d * (M - 1) * ds) <= tail_tol:
            M -= 1
        while k0 * math.exp(-d * M * ds) > tail_tol:
            M += 1
        j = np.arange(M)
        w = -k0 * np.exp(-d * ds * j) * math.expm1(-d * ds)
        dw = -d * w
        tail = k0 * math.exp(-d * M * ds)
        ratio = math.exp(-d * ds)
    else:
        smax = kernel.s[-1]
        ms = np.arange(2, int(smax / ds) + 1)
        hit = np.flatnonzero(kernel.kappa0 - kernel._cumulative(ms * ds) <= tail_tol)
        M = int(ms[hit[0]]) if hit.size else None
        if M is None:
            raise ValueError(
                f"table kernel ending at s={smax} cannot reach tail tolerance {tail_tol}")
        edges = ds * np.arange(M + 1)
        cum = kernel._cumulative(edges)
        w = np.diff(cum)
        mu_e = kernel.mu(edges)
        dw = np.diff(mu_e)
        tail = kernel.kappa0 - float(cum[-1])
        ratio = None
    for a in (w, dw):
        a.setflags(write=False)
    nw, ndw = _node(w), _node(dw)
    nw.setflags(write=False)
    ndw.setflags(write=False)
    return KernelQuadrature(kernel, float(ds), int(M), w, dw, float(tail), nw, ndw, ratio)
