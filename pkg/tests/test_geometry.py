import numpy as np
import pytest

from polygrowth.geometry import (
    GridMismatchError,
    InvalidGridError,
    PolarGrid,
    RangeError,
    ScalarField,
    SectorDomain,
    dirichlet_energy_annulus,
    gradient_energy_annulus,
    harmonic_polynomial,
    laplacian,
    potential_integral_annulus,
    sup_on_circle,
)
from polygrowth.potential import make_sine_gordon


def test_sector_grid_layout():
    g = PolarGrid.sector(3, 10.0, 40, 16)
    assert g.shape == (41, 17)
    assert g.radii[0] == pytest.approx(0.01) and g.radii[-1] == 10.0
    np.testing.assert_allclose(np.diff(np.log(g.radii)), g.dt, rtol=1e-12)
    assert g.theta[0] == pytest.approx(-np.pi / 6) and g.theta[-1] == pytest.approx(np.pi / 6)
    assert g.theta[8] == 0.0


def test_disk_companion_shares_circles_and_step():
    g = PolarGrid.sector(2, 5.0, 20, 8)
    dg = g.disk_companion()
    assert dg.ntheta == 32 and dg.dtheta == pytest.approx(g.dtheta)
    np.testing.assert_array_equal(dg.radii, g.radii)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(d=2, R=1.0, nr=10, ntheta=7, mode="sector"),
        dict(d=2, R=1.0, nr=10, ntheta=12, mode="disk"),
        dict(d=2, R=1.0, nr=1, ntheta=8, mode="sector"),
        dict(d=2, R=1.0, nr=10, ntheta=8, mode="ring"),
        dict(d=2, R=1.0, nr=10, ntheta=8, mode="sector", r_min=2.0),
        dict(d=2, R=1.0, nr=10, ntheta=8, mode="sector", stencil="ninepoint"),
    ],
)
def test_invalid_grids(kwargs):
    with pytest.raises(InvalidGridError):
        PolarGrid(**kwargs)


def test_sector_domain_validation():
    assert SectorDomain(4, 2.0).half_angle == pytest.approx(np.pi / 8)
    with pytest.raises(ValueError):
        SectorDomain(1, 2.0)
    with pytest.raises(ValueError):
        SectorDomain(2, -1.0)


def test_nearest_circle_range():
    g = PolarGrid.sector(2, 10.0, 30, 8)
    assert g.nearest_circle(10.0) == 30
    with pytest.raises(RangeError):
        g.nearest_circle(20.0)


def test_boundary_tags():
    g = PolarGrid.sector(2, 1.0, 4, 4)
    tags = g.boundary_tags()
    assert tags[0, 2] == "origin" and tags[-1, 2] == "arc" and tags[2, 0] == "ray" and tags[2, 2] == "interior"


@pytest.mark.parametrize("mode", ["sector", "disk"])
@pytest.mark.parametrize("d", [2, 3, 5])
def test_tuned_stencil_annihilates_phi(mode, d):
    g = PolarGrid(d, 10.0, 64, 16 if mode == "sector" else 32 * d, mode)
    phi = harmonic_polynomial(d, g)
    lap = laplacian(phi).values
    interior = np.isfinite(lap)
    scale = np.max(g.stiffness_abs_apply(phi.values) / g.mass[:, None])
    assert np.max(np.abs(lap[interior])) <= 1e-13 * scale


def test_phi_symmetries_exact():
    g = PolarGrid.disk(3, 2.0, 8, 48)
    phi = harmonic_polynomial(3, g).values
    n = g.ntheta
    shift = n // 6
    np.testing.assert_array_equal(np.roll(phi, -shift, axis=1), -phi)
    np.testing.assert_array_equal(phi[:, (-np.arange(n)) % n], phi)


def test_standard_stencil_second_order():
    # Laplacian of the non-harmonic r^2 is 4; truncation error should fall by ~4
    errs = []
    for n in (32, 64):
        g = PolarGrid.sector(2, 2.0, n, n, r_min=0.5, stencil="standard")
        rr = np.repeat(g.radii[:, None], g.n_angles, axis=1)
        lap = laplacian(ScalarField(g, rr**2)).values
        errs.append(np.nanmax(np.abs(lap - 4.0)))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.1)


def test_gradient_energy_of_phi():
    # (1/2) int_{a<r<b} |grad phi|^2 over the disk = pi d (b^{2d} - a^{2d}) / 2
    d, a, b = 2, 0.5, 2.0
    vals = []
    for n in (64, 128):
        g = PolarGrid.disk(d, b, n, 8 * n // 8 * d * 4 // 4, r_min=a, stencil="standard")
        vals.append(gradient_energy_annulus(harmonic_polynomial(d, g), a, b))
    exact = np.pi * d * (b ** (2 * d) - a ** (2 * d)) / 2
    assert abs(vals[1] - exact) < abs(vals[0] - exact)
    assert vals[1] == pytest.approx(exact, rel=2e-3)


def test_green_identity_is_exact_discretely():
    # sum by parts: E(u) with u = phi + w, w = 0 on the boundary
    g = PolarGrid.sector(2, 3.0, 20, 10)
    rng = np.random.default_rng(1)
    w = np.zeros(g.shape)
    w[1:-1, 1:-1] = rng.standard_normal(g.interior_shape)
    phi = harmonic_polynomial(2, g).values
    e_u = gradient_energy_annulus(ScalarField(g, phi + w), 0.0, 3.0)
    e_phi = gradient_energy_annulus(ScalarField(g, phi), 0.0, 3.0)
    e_w = gradient_energy_annulus(ScalarField(g, w), 0.0, 3.0)
    cross = float(np.sum(w[1:-1, 1:-1] * g.stiffness_apply(phi)))
    assert e_u == pytest.approx(e_phi + e_w + cross, rel=1e-12)


def test_potential_integral_of_constant_is_area():
    g = PolarGrid.sector(4, 3.0, 30, 12)
    u = ScalarField(g, np.full(g.shape, np.pi))  # F = 2 everywhere
    area = np.pi / 4 * 9 / 2
    assert potential_integral_annulus(u, make_sine_gordon(), 0.0, 3.0) == pytest.approx(2 * area, rel=1e-12)


def test_dirichlet_energy_sums_parts():
    g = PolarGrid.sector(2, 3.0, 12, 8)
    u = harmonic_polynomial(2, g)
    pot = make_sine_gordon()
    assert dirichlet_energy_annulus(u, pot, 0.0, 3.0) == pytest.approx(
        gradient_energy_annulus(u, 0.0, 3.0) + potential_integral_annulus(u, pot, 0.0, 3.0)
    )
    with pytest.raises(RangeError):
        gradient_energy_annulus(u, 2.0, 1.0)


def test_sup_on_circle_and_field_checks(tmp_path):
    g = PolarGrid.sector(2, 4.0, 16, 8)
    phi = harmonic_polynomial(2, g)
    val, r = sup_on_circle(phi, 4.0)
    assert r == 4.0 and val == pytest.approx(16.0)
    other = harmonic_polynomial(2, PolarGrid.sector(2, 4.0, 16, 10))
    with pytest.raises(GridMismatchError):
        phi - other
    with pytest.raises(GridMismatchError):
        ScalarField(g, np.zeros((3, 3)))
    phi.to_csv(tmp_path / "f.csv")
    lines = (tmp_path / "f.csv").read_text().splitlines()
    assert lines[0] == "r,theta,value" and len(lines) == 1 + 17 * 9
