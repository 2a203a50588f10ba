"""Summed past history on the age grid ``s_j = j ds``, transported by exact shifts.

Storage trick: with ``Q^n`` the running total of deposits, node values are
``eta_j = Q^n - B_j`` where ``B`` is a ring buffer.  One transport step then
costs a single row write: ``B`` shifts by one slot and receives the old
``Q^n``, which is the same as ``eta_j <- eta_{j-1} + q`` on every node.
"""
from __future__ import annotations

import struct
from pathlib import Path
from typing import Callable

import numpy as np

from .kernel import KernelQuadrature
from .spectral import ModalBasis, SpectralField

__all__ = [
    "HistoryField",
    "init_history",
    "advance",
    "m_norm",
    "dissipation_pairing",
    "tail_functional",
    "representation_check",
    "save_snapshot",
    "load_snapshot",
]

_HEADER = struct.Struct("<QQd")


class HistoryField:
    """``eta^t(s_j)`` for ``j = 1..M``; ``eta^t(0) = 0`` is implicit."""

    def __init__(self, quad: KernelQuadrature, basis: ModalBasis, values=None):
        self.quad = quad
        self.basis = basis
        M, K = quad.M, basis.size
        self._buf = np.zeros((2 * M, K))
        self._start = M
        self.total = np.zeros(K)
        if values is not None:
            values = np.asarray(values, dtype=float)
            if values.shape != (M, K):
                raise ValueError(f"history values must have shape {(M, K)}, got {values.shape}")
            self._buf[M:] = -values
        self._omega_tail = float(quad.node_weights[1:].sum())
        self.memory = self._memory_from_buffer()

    @property
    def M(self) -> int:
        return self.quad.M

    def copy(self) -> "HistoryField":
        out = HistoryField.__new__(HistoryField)
        out.quad, out.basis = self.quad, self.basis
        out._buf = self._buf.copy()
        out._start = self._start
        out.total = self.total.copy()
        out._omega_tail = self._omega_tail
        out.memory = self.memory.copy()
        return out

    def _window(self) -> np.ndarray:
        return self._buf[self._start:self._start + self.M]

    def values(self) -> np.ndarray:
        """Node values, shape ``(M, K)``; row ``j-1`` is ``eta(s_j)``."""
        return self.total - self._window()

    def node(self, j: int) -> np.ndarray:
        return self.total - self._buf[self._start + j - 1]

    def _memory_from_buffer(self) -> np.ndarray:
        w = self.quad.node_weights
        return w.sum() * self.total - w @ self._window()

    def shifted_memory(self) -> np.ndarray:
        """``sum_j omega_{j+1} eta_j``: the memory integral after a zero-deposit shift."""
        q = self.quad
        if q.ratio is not None and q.M >= 3:
            r = q.ratio
            return (r * (self.memory - q.node_weights[-1] * self.node(q.M))
                    - 0.5 * r * q.weights[-1] * self.node(q.M - 1))
        win = self._buf[self._start:self._start + q.M - 1]
        return self._omega_tail * self.total - q.node_weights[1:] @ win

    def push(self, q: np.ndarray, shifted: np.ndarray | None = None) -> None:
        """Shift by one node and add the deposit ``q`` to every node."""
        if shifted is None:
            shifted = self.shifted_memory()
        M = self.M
        if self._start == 0:
            self._buf[M:] = self._buf[:M]
            self._start = M
        self._start -= 1
        self._buf[self._start] = self.total
        self.total = self.total + q
        self.memory = shifted + self.quad.node_weights.sum() * q

    def resync(self) -> None:
        """Recompute the memory integral from the stored nodes."""
        self.memory = self._memory_from_buffer()

    # norms -----------------------------------------------------------------
    def norm_sq(self, r: float, weights: np.ndarray | None = None) -> float:
        eta = self.values()
        w = self.quad.node_weights if weights is None else weights
        lam = self.basis.eigenvalues
        per_node = np.einsum("jk,k,jk->j", eta, lam ** r, eta) if r else np.einsum("jk,jk->j", eta, eta)
        return float(w @ per_node)


def init_history(quad: KernelQuadrature, basis: ModalBasis,
                 phi: Callable | SpectralField | np.ndarray | None = None) -> HistoryField:
    """``eta^0(s_j) = int_0^{s_j} phi`` by the trapezoidal rule on the node grid.

    ``phi`` may be ``None`` (zero past), a constant field, or a callable
    mapping an array of ages ``(n,)`` to modal coefficients ``(n, K)``.
    """
    if phi is None:
        return HistoryField(quad, basis)
    s = quad.ds * np.arange(quad.M + 1)
    if callable(phi):
        vals = np.asarray(phi(s), dtype=float).reshape(s.size, basis.size)
    else:
        c = phi.coeffs if isinstance(phi, SpectralField) else np.asarray(phi, dtype=float)
        vals = np.broadcast_to(c, (s.size, basis.size))
    cells = 0.5 * quad.ds * (vals[1:] + vals[:-1])
    return HistoryField(quad, basis, np.cumsum(cells, axis=0))


def _coeffs(x) -> np.ndarray:
    return x.coeffs if isinstance(x, SpectralField) else np.asarray(x, dtype=float)


def advance(eta: HistoryField, theta_old, theta_new, dt: float) -> HistoryField:
    """One transport step of ``eta_t + eta_s = theta``; mutates and returns ``eta``.

    ``eta_new(s_1) = q`` and ``eta_new(s_j) = eta_old(s_{j-1}) + q`` with
    ``q = dt/2 (theta_old + theta_new)``; the oldest node leaves the grid.
    """
    if not np.isclose(dt, eta.quad.ds, rtol=1e-12, atol=0.0):
        raise ValueError(f"time step {dt} must equal the history spacing {eta.quad.ds}")
    q = 0.5 * dt * (_coeffs(theta_old) + _coeffs(theta_new))
    eta.push(q)
    return eta


def m_norm(eta: HistoryField, r: float) -> float:
    """``M^r`` norm with trapezoidal cell quadrature against exact cell masses."""
    return float(np.sqrt(eta.norm_sq(r)))


def dissipation_pairing(eta: HistoryField, r: float = 1.0) -> float:
    """``1/2 int mu' ||A^{r/2} eta||^2 ds`` (nonpositive under (H2))."""
    return 0.5 * eta.norm_sq(r, eta.quad.node_dweights)


def tail_functional(eta: HistoryField, y: float) -> tuple[float, float]:
    """Compactness tail ``int_{(0,1/y) u (y,inf)} mu ||A^{1/2} eta||^2``.

    Returns the stored-node value and a bound for the truncated part beyond
    the horizon (tail mass times the largest stored node norm).
    """
    if y < 1:
        raise ValueError(f"y must be >= 1, got {y}")
    vals = eta.values()
    per_node = np.einsum("jk,k,jk->j", vals, eta.basis.eigenvalues, vals)
    s = eta.quad.nodes
    keep = ~((s > 1.0 / y) & (s < y))
    value = float(eta.quad.node_weights[keep] @ per_node[keep])
    return value, float(eta.quad.tail * per_node.max(initial=0.0))


def representation_check(eta: HistoryField, theta_series, dt: float,
                         cadence: int = 1) -> float:
    """Largest modal deviation between ``eta`` and the closed-form history.

    ``theta_series`` holds ``theta`` at ``t_0 .. t_n`` (every step of a run
    started from zero history).  The closed form ``int_0^min(s,t) theta(t-y) dy``
    is rebuilt with the trapezoidal rule at spacing ``cadence * dt``; nodes
    not on the coarse grid are skipped.
    """
    th = np.asarray([_coeffs(x) for x in theta_series], dtype=float)
    if cadence < 1 or int(cadence) != cadence:
        raise ValueError("cadence must be a positive integer")
    if not np.isclose(dt, eta.quad.ds, rtol=1e-12, atol=0.0):
        raise ValueError("sampling step differs from the history spacing")
    n = th.shape[0] - 1
    if n % cadence:
        raise ValueError(f"{n} steps are not a multiple of cadence {cadence}")
    coarse = th[::cadence][::-1]  # coarse[i] = theta(t - i*cadence*dt)
    cells = 0.5 * cadence * dt * (coarse[1:] + coarse[:-1])
    cum = np.concatenate([np.zeros((1, th.shape[1])), np.cumsum(cells, axis=0)])
    vals = eta.values()
    j = np.arange(cadence, eta.M + 1, cadence)
    steps = np.minimum(j // cadence, n // cadence)
    return float(np.abs(vals[j - 1] - cum[steps]).max(initial=0.0))


def save_snapshot(eta: HistoryField, path: str | Path) -> None:
    """Binary dump: little-endian ``M, K, ds`` header then row-major float64 values."""
    vals = np.ascontiguousarray(eta.values(), dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(eta.M, eta.basis.size, eta.quad.ds))
        fh.write(vals.tobytes())


def load_snapshot(path: str | Path, quad: KernelQuadrature, basis: ModalBasis) -> HistoryField:
    raw = Path(path).read_bytes()
    M, K, ds = _HEADER.unpack_from(raw)
    if (M, K) != (quad.M, basis.size) or not np.isclose(ds, quad.ds, rtol=1e-15):
        raise ValueError(f"snapshot ({M}, {K}, {ds}) does not match grid "
                         f"({quad.M}, {basis.size}, {quad.ds})")
    vals = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).reshape(M, K)
    return HistoryField(quad, basis, vals)
