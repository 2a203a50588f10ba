"""Polynomial nonlinearities and equilibria of ``A^2 u + f(u) = 0`` (hinged data)."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from .spectral import ModalBasis, SpectralField

__all__ = [
    "Nonlinearity",
    "Equilibrium",
    "NewtonFailure",
    "DegenerateJacobian",
    "cubic",
    "solve_steady",
    "find_equilibria",
    "stationarity_residual",
    "energy_E_of_u",
    "energy_gap",
    "classify",
    "StabilityReport",
]


class NewtonFailure(RuntimeError):
    pass


class DegenerateJacobian(NewtonFailure):
    """Newton met a singular Jacobian (a degenerate critical point)."""


class Nonlinearity:
    """``f(s) = sum_i a_i s**i`` with antiderivative ``F`` (``F(0) = 0``)."""

    analytic = True

    def __init__(self, coeffs: Sequence[float]):
        c = np.trim_zeros(np.asarray(coeffs, dtype=float), "b")
        if c.size == 0:
            c = np.zeros(1)
        if not np.all(np.isfinite(c)):
            raise ValueError("nonlinearity coefficients must be finite")
        self.f = Polynomial(c)
        self.F = self.f.integ(lbnd=0.0)
        self.df = self.f.deriv()

    @property
    def coeffs(self) -> np.ndarray:
        return self.f.coef.copy()

    @property
    def degree(self) -> int:
        return self.f.degree()

    @property
    def is_zero(self) -> bool:
        return not np.any(self.f.coef)

    @property
    def is_odd(self) -> bool:
        return not np.any(self.f.coef[0::2])

    def __call__(self, s):
        return self.f(s)

    def __repr__(self):
        return f"Nonlinearity({self.f.coef.tolist()})"

    def antiderivative_defect(self) -> float:
        """Coefficient-level check ``F' - f`` (zero up to roundoff)."""
        d = (self.F.deriv() - self.f).coef
        return float(np.abs(d).max(initial=0.0))

    def growth_limits(self) -> tuple[float, float]:
        """``lim f(s)/s`` as ``s -> +inf`` and ``s -> -inf``."""
        c = self.f.coef
        n = c.size - 1
        if n <= 1:
            val = c[1] if n == 1 else 0.0
            return float(val), float(val)
        lead = c[-1]
        plus = math.copysign(math.inf, lead)
        minus = plus if n % 2 == 1 else -plus
        return plus, minus

    def f2_margin(self, C_omega: float, s_max: float = 1e3, s_star: float | None = None) -> float:
        """Sampled ``min f(s)/s + 1/C_omega`` over ``s_star <= |s| <= s_max``."""
        if s_star is None:
            s_star = 0.5 * s_max
        s = np.geomspace(s_star, s_max, 257)
        ratio = np.concatenate([self.f(s) / s, self.f(-s) / -s])
        return float(ratio.min() + 1.0 / C_omega)

    def satisfies_f2(self, C_omega: float) -> bool:
        return min(self.growth_limits()) > -1.0 / C_omega


def cubic(beta: float) -> Nonlinearity:
    """``f(u) = u^3 - beta u``."""
    return Nonlinearity([0.0, -beta, 0.0, 1.0])


def _proj(basis: ModalBasis, poly, c: np.ndarray) -> np.ndarray:
    return basis.from_grid(poly(basis.to_grid(c)))


def _coeffs(u) -> np.ndarray:
    return u.coeffs if isinstance(u, SpectralField) else np.asarray(u, dtype=float)


def gradient(basis: ModalBasis, f: Nonlinearity, c: np.ndarray) -> np.ndarray:
    """Modal coefficients of ``A^2 u + f(u)``."""
    return basis.eigenvalues ** 2 * c + _proj(basis, f, c)


def _neg2(basis: ModalBasis, g: np.ndarray) -> float:
    return math.sqrt(float(np.sum(g * g / basis.eigenvalues ** 2)))


def stationarity_residual(u: SpectralField, f: Nonlinearity) -> float:
    """``||A^2 u + f(u)||_{V^-2}`` with dealiased ``f``."""
    return _neg2(u.basis, gradient(u.basis, f, u.coeffs))


def energy_E_of_u(u: SpectralField, f: Nonlinearity) -> float:
    """``1/2 ||Au||^2 + int F(u)`` by grid quadrature."""
    b = u.basis
    c = u.coeffs
    return 0.5 * float(np.sum(b.eigenvalues ** 2 * c * c)) + float(b.integrate(f.F(b.to_grid(c))))


def energy_gap(u: SpectralField, u_ref: SpectralField, f: Nonlinearity) -> float:
    """``E(u) - E(u_ref)`` expanded in ``e = u - u_ref`` to avoid cancellation."""
    b = u.basis
    e = u.coeffs - u_ref.coeffs
    lam2 = b.eigenvalues ** 2
    quad = float(np.sum(lam2 * (u_ref.coeffs + 0.5 * e) * e))
    ug, eg = b.to_grid(u_ref.coeffs), b.to_grid(e)
    # Taylor series of F about u_ref terminates for polynomial F
    acc = np.zeros_like(ug)
    deriv = f.F
    fact = 1.0
    terms = []
    for n in range(1, f.F.degree() + 1):
        deriv = deriv.deriv()
        fact *= n
        terms.append(deriv(ug) / fact)
    for coef in reversed(terms):
        acc = (acc + coef) * eg
    return quad + float(b.integrate(acc))


def jacobian(basis: ModalBasis, f: Nonlinearity, c: np.ndarray) -> np.ndarray:
    """``diag(lam^2) + P diag(f'(u)) S``, symmetric."""
    fp = f.df(basis.to_grid(c))
    J = basis.analysis @ (fp[:, None] * basis.synthesis)
    J = 0.5 * (J + J.T)
    J[np.diag_indices_from(J)] += basis.eigenvalues ** 2
    return J


@dataclass
class Equilibrium:
    u: SpectralField
    residual: float
    spectrum: np.ndarray
    nondegenerate: bool
    iterations: int = 0
    ratios: list[float] = field(default_factory=list)
    energy: float = 0.0

    def to_record(self) -> dict:
        return {
            "coefficients": [float(x) for x in self.u.coeffs],
            "residual": self.residual,
            "spectrum": [float(x) for x in self.spectrum],
            "nondegenerate": self.nondegenerate,
            "energy": self.energy,
            "iterations": self.iterations,
        }


def _spectrum(basis: ModalBasis, f: Nonlinearity, c: np.ndarray) -> np.ndarray:
    return np.sort(np.linalg.eigvalsh(jacobian(basis, f, c)))


def solve_steady(basis: ModalBasis, f: Nonlinearity, guess, tol: float = 1e-12,
                 max_iter: int = 200, step_tol: float = 1e-13,
                 degeneracy_tol: float = 1e-8) -> Equilibrium:
    """Newton iteration on modal coefficients.

    Stops once the ``V^-2`` residual is below ``tol`` and the last correction
    is below ``step_tol`` (relative); the second test matters at degenerate
    roots, where Newton only contracts linearly.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    c = np.array(_coeffs(guess), dtype=float)
    if not np.all(np.isfinite(c)):
        raise ValueError("guess must be finite")
    res_hist = []
    step = math.inf
    for it in range(max_iter + 1):
        g = gradient(basis, f, c)
        res = _neg2(basis, g)
        res_hist.append(res)
        if res == 0.0 or (res <= tol and step <= step_tol * (1.0 + np.linalg.norm(c))):
            break
        if it == max_iter:
            raise NewtonFailure(f"no convergence after {max_iter} iterations (residual {res:.3e})")
        J = jacobian(basis, f, c)
        try:
            dc = np.linalg.solve(J, g)
        except np.linalg.LinAlgError as exc:
            raise DegenerateJacobian(f"singular Jacobian at iteration {it}") from exc
        if not np.all(np.isfinite(dc)):
            raise DegenerateJacobian(f"singular Jacobian at iteration {it}")
        c = c - dc
        step = float(np.linalg.norm(dc))
    ratios = [b / a ** 2 for a, b in zip(res_hist[:-1], res_hist[1:]) if a > 0]
    u = SpectralField(c, basis)
    spec = _spectrum(basis, f, c)
    scale = max(1.0, float(np.abs(spec).max()))
    return Equilibrium(u, res, spec, bool(np.abs(spec).min() > degeneracy_tol * scale),
                       it, ratios, energy_E_of_u(u, f))


def default_guesses(basis: ModalBasis, amplitudes: Iterable[float] = (0.5, 1.0, 2.0, 4.0)):
    yield basis.zero()
    for a in amplitudes:
        for sign in (1.0, -1.0):
            yield basis.mode_field(0, sign * a)


def find_equilibria(basis: ModalBasis, f: Nonlinearity, guesses=None, tol: float = 1e-12,
                    dedup: float = 1e-6) -> list[Equilibrium]:
    """Newton from each guess; failures are skipped, duplicates (V^2) merged."""
    guesses = list(default_guesses(basis) if guesses is None else guesses)
    found: list[Equilibrium] = []
    lam = basis.eigenvalues
    for g in guesses:
        try:
            eq = solve_steady(basis, f, g, tol=tol)
        except NewtonFailure:
            continue
        if not all(math.sqrt(float(np.sum(lam ** 2 * (eq.u.coeffs - o.u.coeffs) ** 2))) > dedup
                   for o in found):
            continue
        found.append(eq)
    found.sort(key=lambda e: (e.energy, float(e.u.coeffs[0])))
    return found


def nearest(equilibria: Sequence[Equilibrium], u: SpectralField) -> Equilibrium:
    """Equilibrium closest to ``u`` in ``V^2``."""
    lam2 = u.basis.eigenvalues ** 2
    return min(equilibria, key=lambda e: float(np.sum(lam2 * (u.coeffs - e.u.coeffs) ** 2)))


@dataclass
class StabilityReport:
    nondegenerate: bool
    minimizer: bool
    lowest: float
    smallest_abs: float


def classify(eq: Equilibrium, tol: float = 1e-8) -> StabilityReport:
    spec = eq.spectrum
    scale = max(1.0, float(np.abs(spec).max()))
    small = float(np.abs(spec).min())
    return StabilityReport(small > tol * scale, bool(spec.min() > tol * scale),
                           float(spec.min()), small)


def export_equilibria(equilibria: Sequence[Equilibrium], path: str | Path) -> None:
    Path(path).write_text(json.dumps([e.to_record() for e in equilibria], indent=2))
