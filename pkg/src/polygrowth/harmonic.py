"""Harmonic extension of circle traces and the energy and oscillation comparisons.

The extension of a trace on |z| = r is kept as the analytic function

    h(z) = sum_j C_j z^j,   C_j = (a_j - i b_j) / r^j,

so that phi^r = Re h is exactly harmonic, grad phi^r = (Re h', -Im h') and the
Hessian of Re h has spectral norm |h''|.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import DISK, PolarGrid, ScalarField, gradient_energy_annulus
from .potential import PeriodicPotential


class AliasingError(ValueError):
    pass


@dataclass
class HarmonicExtension:
    radius: float
    a: np.ndarray
    b: np.ndarray

    @property
    def J(self) -> int:
        return len(self.a) - 1

    @property
    def taylor(self) -> np.ndarray:
        """Complex Taylor coefficients C_j of h(z)."""
        j = np.arange(self.J + 1)
        return (self.a - 1j * self.b) * np.exp(-j * np.log(self.radius))

    def value(self, rho, theta):
        """phi^r(rho, theta) for arbitrary (broadcastable) polar points."""
        rho, theta = np.broadcast_arrays(np.asarray(rho, float), np.asarray(theta, float))
        z = rho * np.exp(1j * theta)
        return np.real(np.polynomial.polynomial.polyval(z / self.radius, self.a - 1j * self.b))

    def on_circle(self, rho: float, n: int) -> np.ndarray:
        """Values at n equally spaced angles theta_k = 2 pi k / n on |z| = rho."""
        if n < 2 * self.J + 2:
            raise AliasingError(f"{n} angles cannot carry {self.J} modes")
        spec = np.zeros(n // 2 + 1, dtype=complex)
        j = np.arange(self.J + 1)
        scale = (rho / self.radius) ** j
        spec[: self.J + 1] = (self.a - 1j * self.b) * scale * (n / 2)
        spec[0] = self.a[0] * n
        return np.fft.irfft(spec, n)

    def on_grid(self, grid: PolarGrid, rmax: float | None = None) -> ScalarField:
        """Evaluate on disk-grid circles with radius <= rmax (NaN beyond)."""
        if grid.mode != DISK:
            raise ValueError("harmonic extension is evaluated on disk grids")
        rmax = self.radius if rmax is None else rmax
        vals = np.full(grid.shape, np.nan)
        for i, rho in enumerate(grid.radii):
            if rho <= rmax * (1 + 1e-12):
                vals[i] = self.on_circle(rho, grid.ntheta)
        return ScalarField(grid, vals)

    def second_derivative(self, z) -> np.ndarray:
        """h''(z)."""
        zeta = np.asarray(z, dtype=complex) / self.radius
        C = self.a - 1j * self.b
        j = np.arange(self.J + 1)
        if self.J < 2:
            return np.zeros_like(zeta)
        return np.polynomial.polynomial.polyval(zeta, (C * j * (j - 1))[2:]) / self.radius**2


def fourier_coefficients(trace: np.ndarray, J: int) -> tuple[np.ndarray, np.ndarray]:
    """Real Fourier coefficients of a periodic trace at equally spaced angles from 0."""
    n = len(trace)
    if J > n // 2 - 1:
        raise AliasingError(f"J = {J} exceeds n/2 - 1 = {n // 2 - 1}")
    spec = np.fft.rfft(trace)
    a = 2.0 * spec.real[: J + 1] / n
    b = -2.0 * spec.imag[: J + 1] / n
    a[0] /= 2.0
    b[0] = 0.0
    return a, b


def harmonic_extension(field: ScalarField, r: float, J: int | None = None) -> HarmonicExtension:
    """Fourier-series harmonic extension of the trace on the grid circle nearest r."""
    g = field.grid
    if g.mode != DISK:
        raise ValueError("harmonic_extension needs a disk-mode field")
    J = g.ntheta // 2 - 1 if J is None else J
    i = g.nearest_circle(r)
    a, b = fourier_coefficients(field.values[i], J)
    return HarmonicExtension(float(g.radii[i]), a, b)


def symmetry_defect(ext: HarmonicExtension, d: int) -> tuple[float, float]:
    """(max |b_j|, max |a_j| over j not an odd multiple of d), both relative to max |a|."""
    scale = np.max(np.abs(ext.a)) or 1.0
    j = np.arange(ext.J + 1)
    allowed = (j % d == 0) & ((j // d) % 2 == 1)
    return float(np.max(np.abs(ext.b)) / scale), float(np.max(np.abs(ext.a[~allowed])) / scale)


@dataclass
class EnergyComparison:
    r: float
    lhs: float
    rhs_identity: float
    bound: float


def _ball_fields(u: ScalarField, ext: HarmonicExtension):
    g = u.grid
    i_r = g.nearest_circle(ext.radius)
    phir = ext.on_grid(g)
    return i_r, phir


def energy_comparison_check(u: ScalarField, ext: HarmonicExtension, potential: PeriodicPotential, r: float | None = None) -> EnergyComparison:
    """Energy comparison on B_r: lhs = int |grad phi^r - grad u|^2,
    rhs_identity = int |grad u|^2 - |grad phi^r|^2, bound = 2 osc(F) pi r^2."""
    g = u.grid
    r = ext.radius if r is None else r
    i_r, phir = _ball_fields(u, ext)
    r0, r1 = g.radii[0], g.radii[i_r]
    vals = np.where(np.isfinite(phir.values), phir.values, 0.0)
    phir = ScalarField(g, vals)
    diff = ScalarField(g, vals - u.values)
    lhs = 2.0 * gradient_energy_annulus(diff, r0, r1)
    rhs = 2.0 * (gradient_energy_annulus(u, r0, r1) - gradient_energy_annulus(phir, r0, r1))
    bound = 2.0 * potential.osc * np.pi * r1**2
    return EnergyComparison(float(r1), float(lhs), float(rhs), float(bound))


def half_ball_deviation(u: ScalarField, ext: HarmonicExtension, r: float | None = None) -> float:
    """sup over grid nodes in B_{r/2} of |phi^r - u|."""
    g = u.grid
    r = ext.radius if r is None else r
    phir = ext.on_grid(g, rmax=r / 2)
    inside = g.radii <= r / 2 * (1 + 1e-12)
    return float(np.max(np.abs(phir.values[inside] - u.values[inside])))


@dataclass
class PhiComparison:
    sup_diff: float
    hessian_diff: float


def phi_r_vs_phi_check(ext: HarmonicExtension, d: int, r: float | None = None, n_angles: int = 4096) -> PhiComparison:
    """sup over B_{r/2} of |phi^r - phi| and of the Hessian difference (spectral norm).

    Both quantities are (sub)harmonic, so the suprema are attained on |z| = r/2.
    """
    r = ext.radius if r is None else r
    # work in zeta = z / R_ext so no coefficient over- or underflows
    rho = ext.radius
    C = (ext.a - 1j * ext.b).astype(complex)
    if d > ext.J:
        C = np.concatenate([C, np.zeros(d - ext.J, dtype=complex)])
    C[d] -= rho**d
    n = max(n_angles, 4 * len(C))
    theta = 2 * np.pi * np.arange(n) / n
    zeta = (r / 2 / rho) * np.exp(1j * theta)
    j = np.arange(len(C))
    H = np.polynomial.polynomial.polyval(zeta, C)
    H2 = np.polynomial.polynomial.polyval(zeta, (C * j * (j - 1))[2:]) / rho**2
    return PhiComparison(float(np.max(np.abs(H.real))), float(np.max(np.abs(H2))))
