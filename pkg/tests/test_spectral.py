import math
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from thermoplate.spectral import (AliasingWarning, DomainSpec, SpectralField, apply_A_power,
                                  build_basis, evaluate_nonlinearity, project, v_norm)
from thermoplate.stationary import Nonlinearity


@pytest.mark.parametrize("spec, expected", [
    (DomainSpec(1, (math.pi,), 4), [1, 4, 9, 16]),
    (DomainSpec(2, (math.pi, math.pi), 2), [2, 5, 5, 8]),
    (DomainSpec(1, (2 * math.pi,), 2), [0.25, 1.0]),
])
def test_eigenvalues(spec, expected):
    np.testing.assert_allclose(build_basis(spec).eigenvalues, expected, rtol=1e-14)


@pytest.mark.parametrize("kw", [dict(modes=0), dict(sides=(0.0,)), dict(sides=(-1.0,)),
                                dict(oversampling=Fraction(4, 3)), dict(dimension=3)])
def test_domain_rejects(kw):
    with pytest.raises(ValueError):
        DomainSpec(**kw)


def test_2d_single_side_is_square():
    assert DomainSpec(2, (math.pi,), 3).sides == (math.pi, math.pi)


def test_constants_default_domain():
    b = build_basis(DomainSpec(modes=4))
    assert b.C_omega == pytest.approx(1.0)
    assert b.C_P == pytest.approx(1.0)


@given(n=st.integers(1, 24), side=st.floats(0.5, 10.0), dim=st.sampled_from([1, 2]))
def test_grid_orthonormality(n, side, dim):
    if dim == 2:
        n = min(n, 6)
    b = build_basis(DomainSpec(dim, (side,) * dim, n))
    np.testing.assert_allclose(b.analysis @ b.synthesis, np.eye(b.size), atol=1e-12)


@given(st.lists(st.floats(-5, 5), min_size=6, max_size=6))
def test_round_trip(c):
    b = build_basis(DomainSpec(modes=6))
    c = np.array(c)
    np.testing.assert_allclose(b.from_grid(b.to_grid(c)), c, atol=1e-12)


def test_cubic_projection_matches_quadrature():
    # independent oracle: adaptive quadrature of u^3 against each eigenfunction
    b = build_basis(DomainSpec(modes=5))
    c = np.array([0.7, -0.4, 0.0, 0.2, 0.1])
    phi = lambda k, x: math.sqrt(2 / math.pi) * math.sin(k * x)
    u = lambda x: sum(ck * phi(k + 1, x) for k, ck in enumerate(c))
    ref = [quad(lambda x: u(x) ** 3 * phi(k, x), 0, math.pi, epsabs=1e-14, limit=200)[0]
           for k in range(1, 6)]
    got = evaluate_nonlinearity(b.field(c), Nonlinearity([0, 0, 0, 1])).coeffs
    np.testing.assert_allclose(got, ref, atol=1e-13)


def test_aliasing_warning():
    b = build_basis(DomainSpec(modes=8, oversampling=Fraction(3, 2)))
    assert b.exact_degree() == 2
    with pytest.warns(AliasingWarning):
        evaluate_nonlinearity(b.mode_field(0), Nonlinearity([0, 0, 0, 1]))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        project(b, lambda x: x ** 2, b.mode_field(0).coeffs, degree=2)


def test_exact_degree_default():
    assert build_basis(DomainSpec(modes=32)).exact_degree() == 3


def test_quadrature_exact_for_quartic():
    b = build_basis(DomainSpec(modes=4))
    u = b.field([1.0, 0.5, -0.25, 0.1]).grid_values()
    fine = build_basis(DomainSpec(modes=4, oversampling=Fraction(8)))
    uf = fine.field([1.0, 0.5, -0.25, 0.1]).grid_values()
    assert b.integrate(u ** 4) == pytest.approx(fine.integrate(uf ** 4), rel=1e-13)


def test_norms_and_powers():
    b = build_basis(DomainSpec(modes=4))
    f = b.field([0.0, 1.0, 0.0, 0.0])  # lam = 4
    assert v_norm(f, 2) == pytest.approx(4.0)
    assert f.norm(-1) == pytest.approx(0.5)
    assert apply_A_power(f, 0) is f
    np.testing.assert_allclose(apply_A_power(f, 0.5).coeffs, [0, 2, 0, 0])


def test_field_validation():
    b = build_basis(DomainSpec(modes=3))
    with pytest.raises(ValueError):
        SpectralField(np.zeros(2), b)
    with pytest.raises(ValueError):
        SpectralField(np.array([0, np.nan, 0]), b)
    f = b.field([1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        f.coeffs[0] = 5
    np.testing.assert_allclose((2 * f - f + (-f)).coeffs, 0)


def test_flat_index_2d():
    b = build_basis(DomainSpec(2, (math.pi,), 3))
    k = b.flat_index((2, 1))
    assert b.eigenvalues[k] == pytest.approx(5)
    with pytest.raises(KeyError):
        b.flat_index((4, 1))
