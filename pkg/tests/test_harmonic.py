import numpy as np
import pytest

from polygrowth.geometry import PolarGrid, ScalarField, harmonic_polynomial
from polygrowth.harmonic import (
    AliasingError,
    HarmonicExtension,
    fourier_coefficients,
    harmonic_extension,
    energy_comparison_check,
    half_ball_deviation,
    phi_r_vs_phi_check,
    symmetry_defect,
)
from polygrowth.potential import make_sine_gordon, make_zero


def polar(grid):
    return np.meshgrid(grid.radii, grid.theta, indexing="ij")


def test_fourier_coefficients_of_known_trace():
    th = 2 * np.pi * np.arange(64) / 64
    a, b = fourier_coefficients(3.0 + 2 * np.cos(2 * th) - 0.5 * np.sin(5 * th), 10)
    assert a[0] == pytest.approx(3.0) and a[2] == pytest.approx(2.0) and b[5] == pytest.approx(-0.5)
    assert np.max(np.abs(np.delete(a, [0, 2]))) < 1e-14
    with pytest.raises(AliasingError):
        fourier_coefficients(th, 32)


def test_extension_of_harmonic_polynomial_is_itself():
    d = 3
    g = PolarGrid.disk(d, 4.0, 60, 48)
    phi = harmonic_polynomial(d, g)
    ext = harmonic_extension(phi, 2.0)
    assert ext.a[d] == pytest.approx(ext.radius**d, rel=1e-13)
    vals = ext.on_grid(g).values
    inside = g.radii <= ext.radius
    np.testing.assert_allclose(vals[inside], phi.values[inside], atol=1e-12 * ext.radius**d)
    cmp_ = phi_r_vs_phi_check(ext, d)
    assert cmp_.sup_diff < 1e-12 and cmp_.hessian_diff < 1e-12


def test_extension_reproduces_interior_of_harmonic_function():
    # u = Re(z^2) + 0.1 Re(z^6): the trace on |z| = r extends to u itself
    g = PolarGrid.disk(2, 3.0, 40, 64)
    rr, tt = polar(g)
    u = rr**2 * np.cos(2 * tt) + 0.1 * rr**6 * np.cos(6 * tt)
    ext = harmonic_extension(ScalarField(g, u), 2.0)
    assert ext.value(1.0, 0.3) == pytest.approx(np.cos(0.6) + 0.1 * np.cos(1.8), rel=1e-12)
    cmp_ = phi_r_vs_phi_check(ext, 2, n_angles=2048)
    rho = ext.radius / 2
    assert cmp_.sup_diff == pytest.approx(0.1 * rho**6, rel=1e-10)
    assert cmp_.hessian_diff == pytest.approx(0.1 * 30 * rho**4, rel=1e-10)
    z = 0.7 * np.exp(0.2j)
    assert ext.second_derivative(z) == pytest.approx(2 + 0.1 * 30 * z**4, rel=1e-10)


def test_symmetry_defect_detects_forbidden_modes():
    g = PolarGrid.disk(2, 3.0, 20, 32)
    rr, tt = polar(g)
    ok = harmonic_extension(ScalarField(g, rr**2 * np.cos(2 * tt) + rr**6 * np.cos(6 * tt)), 2.0)
    assert max(symmetry_defect(ok, 2)) < 1e-14
    bad = harmonic_extension(ScalarField(g, rr**2 * np.cos(2 * tt) + 1e-3 * rr**4 * np.cos(4 * tt)), 2.0)
    assert symmetry_defect(bad, 2)[1] == pytest.approx(1e-3 * bad.radius**2, rel=1e-6)


def test_energy_comparison_zero_potential_trivial():
    g = PolarGrid.disk(2, 10.0, 80, 64)
    phi = harmonic_polynomial(2, g)
    ext = harmonic_extension(phi, 5.0)
    rec = energy_comparison_check(phi, ext, make_zero())
    assert rec.lhs < 1e-20 and abs(rec.rhs_identity) < 1e-9 and rec.bound == 0.0
    assert half_ball_deviation(phi, ext) < 1e-12


def test_energy_identity_for_nonharmonic_field():
    # for u = phi + bump the identity holds up to the discrete harmonicity defect of phi^r
    g = PolarGrid.disk(2, 4.0, 120, 128, r_min=1e-3)
    rr, tt = polar(g)
    u = rr**2 * np.cos(2 * tt) + 0.3 * np.exp(-((rr - 1.0) ** 2) * 4) * np.cos(2 * tt) ** 2
    ext = harmonic_extension(ScalarField(g, u), 3.0)
    rec = energy_comparison_check(ScalarField(g, u), ext, make_sine_gordon())
    assert rec.lhs > 0
    assert abs(rec.lhs - rec.rhs_identity) <= 1e-3 * max(rec.lhs, rec.r**2)
    assert rec.bound == pytest.approx(4 * np.pi * rec.r**2)


def test_on_circle_aliasing():
    ext = HarmonicExtension(1.0, np.ones(10), np.zeros(10))
    with pytest.raises(AliasingError):
        ext.on_circle(0.5, 16)
