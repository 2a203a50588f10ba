"""Sine eigenbasis of the Dirichlet Laplacian on intervals and rectangles.

The basis diagonalises ``A = -Laplacian`` with hinged data, so fractional
powers ``A**p`` act by scaling modal coefficients with ``lam**p``.  Pointwise
products are evaluated pseudo-spectrally on an interior DST-I grid; the grid
sum with uniform weights is an exact quadrature for every sine/cosine product
whose wave number stays below ``2 * (G + 1)`` where ``G`` is the number of
interior points per dimension.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "AliasingWarning",
    "DomainSpec",
    "ModalBasis",
    "SpectralField",
    "build_basis",
    "v_norm",
    "apply_A_power",
    "evaluate_nonlinearity",
]


class AliasingWarning(UserWarning):
    """The collocation grid is too coarse to project a product exactly."""


@dataclass(frozen=True)
class DomainSpec:
    """Box domain ``(0, L1) x ... `` with ``modes`` sine modes per dimension."""

    dimension: int = 1
    sides: tuple[float, ...] = (math.pi,)
    modes: int = 32
    oversampling: Fraction = Fraction(2)

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {self.dimension}")
        sides = tuple(float(s) for s in self.sides)
        if len(sides) == 1 and self.dimension == 2:
            sides = sides * 2
        if len(sides) != self.dimension:
            raise ValueError("need one side length per dimension")
        if any(not (s > 0.0) or not math.isfinite(s) for s in sides):
            raise ValueError(f"side lengths must be positive, got {sides}")
        if int(self.modes) != self.modes or self.modes < 1:
            raise ValueError(f"modes must be a positive integer, got {self.modes}")
        over = Fraction(self.oversampling).limit_denominator(1000)
        if over < Fraction(3, 2):
            raise ValueError(f"oversampling must be >= 3/2, got {over}")
        object.__setattr__(self, "sides", sides)
        object.__setattr__(self, "modes", int(self.modes))
        object.__setattr__(self, "oversampling", over)

    @property
    def grid_points(self) -> int:
        """Interior collocation points per dimension."""
        return math.ceil(self.oversampling * self.modes)


@dataclass(frozen=True, eq=False)
class ModalBasis:
    """Eigenpairs of ``A`` on a box, sorted by eigenvalue.

    Attributes
    ----------
    eigenvalues : ndarray, shape (K,)
        ``lam_k`` ascending (stable order for repeated values).
    index : ndarray, shape (K, dim)
        Integer half-wave numbers of each flat mode.
    synthesis : ndarray, shape (P, K)
        Values of the L2-normalised eigenfunctions at the grid points.
    weights : ndarray, shape (P,)
        Quadrature weights of the grid.
    """

    spec: DomainSpec
    eigenvalues: np.ndarray
    index: np.ndarray
    nodes: tuple[np.ndarray, ...]
    weights: np.ndarray
    synthesis: np.ndarray
    analysis: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return self.eigenvalues.size

    @property
    def lam1(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def C_omega(self) -> float:
        """Best constant in ``||w||^2 <= C ||Aw||^2``."""
        return self.lam1 ** -2

    @property
    def C_P(self) -> float:
        """Poincare constant in ``||w|| <= C ||grad w||``."""
        return self.lam1 ** -0.5

    def flat_index(self, mode: Sequence[int]) -> int:
        hits = np.flatnonzero((self.index == np.asarray(mode)).all(axis=1))
        if hits.size == 0:
            raise KeyError(f"mode {tuple(mode)} not retained")
        return int(hits[0])

    def to_grid(self, coeffs: np.ndarray) -> np.ndarray:
        """Modal coefficients -> point values (last axis is the mode axis)."""
        return coeffs @ self.synthesis.T

    def from_grid(self, values: np.ndarray) -> np.ndarray:
        """Point values -> projection onto the retained modes."""
        return values @ self.analysis.T

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Grid quadrature of point values over the domain."""
        return values @ self.weights

    def field(self, coeffs) -> "SpectralField":
        return SpectralField(np.asarray(coeffs, dtype=float), self)

    def zero(self) -> "SpectralField":
        return SpectralField(np.zeros(self.size), self)

    def mode_field(self, k: int, amplitude: float = 1.0) -> "SpectralField":
        c = np.zeros(self.size)
        c[k] = amplitude
        return SpectralField(c, self)

    def exact_degree(self) -> int:
        """Largest polynomial degree whose products project without aliasing."""
        g = self.spec.grid_points
        n = self.spec.modes
        # mode deg*N aliases onto 2(G+1) - deg*N, which must exceed N
        return (2 * (g + 1) - 1) // n - 1


def _sine_1d(side: float, n: int, g: int):
    x = side * np.arange(1, g + 1) / (g + 1)
    k = np.arange(1, n + 1)
    phi = math.sqrt(2.0 / side) * np.sin(np.outer(x, k) * math.pi / side)
    lam = (k * math.pi / side) ** 2
    return x, side / (g + 1), phi, lam


def build_basis(spec: DomainSpec) -> ModalBasis:
    """Assemble the sine eigenbasis and collocation transforms for ``spec``."""
    n, g = spec.modes, spec.grid_points
    parts = [_sine_1d(side, n, g) for side in spec.sides]
    if spec.dimension == 1:
        x, h, phi, lam = parts[0]
        idx = np.arange(1, n + 1)[:, None]
        weights = np.full(g, h)
        synth = phi
        nodes = (x,)
    else:
        (x, hx, px, lx), (y, hy, py, ly) = parts
        lam = (lx[:, None] + ly[None, :]).ravel()
        i, j = np.meshgrid(np.arange(1, n + 1), np.arange(1, n + 1), indexing="ij")
        idx = np.stack([i.ravel(), j.ravel()], axis=1)
        synth = np.kron(px, py)
        weights = np.full(g * g, hx * hy)
        X, Y = np.meshgrid(x, y, indexing="ij")
        nodes = (X.ravel(), Y.ravel())
    order = np.argsort(lam, kind="stable")
    lam, idx, synth = lam[order], idx[order], synth[:, order]
    analysis = synth.T * weights
    for arr in (lam, idx, weights, synth, analysis):
        arr.setflags(write=False)
    return ModalBasis(spec, lam, idx, nodes, weights, synth, analysis)


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Coefficient vector on a :class:`ModalBasis`."""

    coeffs: np.ndarray
    basis: ModalBasis

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.shape != (self.basis.size,):
            raise ValueError(f"expected {self.basis.size} coefficients, got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("field has non-finite coefficients")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        return SpectralField(self.coeffs + other.coeffs, self.basis)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        return SpectralField(self.coeffs - other.coeffs, self.basis)

    def __mul__(self, alpha: float) -> "SpectralField":
        return SpectralField(alpha * self.coeffs, self.basis)

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField":
        return SpectralField(-self.coeffs, self.basis)

    def grid_values(self) -> np.ndarray:
        return self.basis.to_grid(self.coeffs)

    def norm(self, r: float = 0.0) -> float:
        return v_norm(self, r)


def weighted_sq(coeffs: np.ndarray, lam: np.ndarray, r: float) -> np.ndarray:
    """``sum_k lam_k**r c_k**2`` along the last axis."""
    if r == 0:
        return np.einsum("...k,...k->...", coeffs, coeffs)
    return np.einsum("...k,k,...k->...", coeffs, lam ** r, coeffs)


def v_norm(field: SpectralField, r: float) -> float:
    """``V^r`` norm ``sqrt(sum lam_k**r c_k**2)``."""
    return math.sqrt(float(weighted_sq(field.coeffs, field.basis.eigenvalues, r)))


def apply_A_power(field: SpectralField, p: float) -> SpectralField:
    if p == 0:
        return field
    return SpectralField(field.coeffs * field.basis.eigenvalues ** p, field.basis)


def project(basis: ModalBasis, f: Callable[[np.ndarray], np.ndarray],
            coeffs: np.ndarray, degree: int | None = None) -> np.ndarray:
    """Modal projection of ``f(u)`` for coefficient array(s) ``coeffs``."""
    if degree is not None and degree > basis.exact_degree():
        warnings.warn(
            f"grid of {basis.spec.grid_points} points per dimension aliases a "
            f"degree-{degree} product of {basis.spec.modes} modes",
            AliasingWarning, stacklevel=3)
    return basis.from_grid(f(basis.to_grid(coeffs)))


def evaluate_nonlinearity(field: SpectralField, f) -> SpectralField:
    """Pseudo-spectral projection of ``f(u)`` onto the retained band.

    ``f`` is a :class:`~thermoplate.stationary.Nonlinearity` or any vectorised
    callable; polynomial degree (when known) drives the aliasing check.
    """
    degree = getattr(f, "degree", None)
    return SpectralField(project(field.basis, f, field.coeffs, degree), field.basis)
