"""One-dimensional linear-growth solutions and their planar extensions.

A rotating solution of  v'' + kappa f(v) = 0  with first integral
1/2 v'^2 + kappa F(v) = E  is obtained by quadrature of
s(v) = int_0^v dw / sqrt(2 (E - kappa F(w))).  The planar function
u(x) = v(a.x) with |a|^2 = 1/kappa then solves -Lap u = f(u).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator

from .geometry import PolarGrid, ScalarField, laplacian
from .potential import PeriodicPotential


class NonRotatingError(ValueError):
    """E <= kappa * max F: the orbit librates (or is the separatrix)."""


@dataclass
class RotatingSolution:
    potential: PeriodicPotential
    E: float
    kappa: float
    s: np.ndarray
    v: np.ndarray
    period: float
    mean_slope: float
    deviation: float
    offset: float

    def __post_init__(self):
        T = self.potential.period
        # one period of samples, used by the interpolating evaluator
        n = int(round((len(self.v) - 1) / 4))
        self._interp = PchipInterpolator(self.s[: n + 1], self.v[: n + 1])
        self._T = T

    def __call__(self, s):
        """v(s) for arbitrary real s, using v(s + P) = v(s) + T."""
        s = np.asarray(s, dtype=float)
        k = np.floor(s / self.period)
        return self._interp(s - k * self.period) + k * self._T

    def velocity(self, v):
        return np.sqrt(2.0 * (self.E - self.kappa * self.potential.F(v)))

    @property
    def slope_vector_norm(self) -> float:
        return 1.0 / np.sqrt(self.kappa)


def quadrature_solution(
    potential: PeriodicPotential, E: float, kappa: float = 1.0, samples_per_period: int = 10_000
) -> RotatingSolution:
    """Sample a rotating solution over four periods in v."""
    T = potential.period
    if not E > kappa * potential.max_F + 1e-9:
        raise NonRotatingError(
            f"E = {E} is not above kappa * max F = {kappa * potential.max_F}; "
            "only the rotation regime has linear growth"
        )

    def ds_dv(w):
        return 1.0 / np.sqrt(2.0 * (E - kappa * float(potential.F(np.array(w)))))

    n = int(samples_per_period)
    v1 = np.linspace(0.0, T, n + 1)
    pieces = [quad(ds_dv, a, b, epsabs=0.0, epsrel=1e-12, limit=200)[0] for a, b in zip(v1[:-1], v1[1:])]
    s1 = np.concatenate([[0.0], np.cumsum(pieces)])
    P = float(s1[-1])
    s = np.concatenate([s1[:-1] + k * P for k in range(4)] + [[4 * P]])
    v = np.concatenate([v1[:-1] + k * T for k in range(4)] + [[4 * T]])
    slope = T / P
    dev = v - slope * s
    offset = 0.5 * (dev.max() + dev.min())
    deviation = float(np.max(np.abs(dev - offset)))
    return RotatingSolution(potential, float(E), float(kappa), s, v, P, slope, deviation, float(offset))


def second_derivative_nonuniform(s: np.ndarray, v: np.ndarray) -> np.ndarray:
    h1 = s[1:-1] - s[:-2]
    h2 = s[2:] - s[1:-1]
    return 2.0 * ((v[2:] - v[1:-1]) / h2 - (v[1:-1] - v[:-2]) / h1) / (h1 + h2)


def verify_ode(solution: RotatingSolution) -> float:
    """max |v'' + kappa f(v)| over interior samples."""
    vpp = second_derivative_nonuniform(solution.s, solution.v)
    return float(np.max(np.abs(vpp + solution.kappa * solution.potential.f(solution.v[1:-1]))))


def first_integral_error(solution: RotatingSolution) -> float:
    """max |1/2 (dv/ds)^2 - (E - kappa F(v))| with secant slopes at interval midpoints."""
    s, v = solution.s, solution.v
    slope = np.diff(v) / np.diff(s)
    vm = 0.5 * (v[1:] + v[:-1])
    return float(np.max(np.abs(0.5 * slope**2 - (solution.E - solution.kappa * solution.potential.F(vm)))))


def fourth_derivative_bound(solution: RotatingSolution, n: int = 20001) -> float:
    """max |v''''| via v'''' = kappa^2 f'(v) f(v) - 2 kappa f''(v) (E - kappa F(v))."""
    pot, k, E = solution.potential, solution.kappa, solution.E
    v = np.linspace(0.0, pot.period, n)
    h = 1e-5
    fpp = (pot.fprime(v + h) - pot.fprime(v - h)) / (2 * h)
    v4 = k * k * pot.fprime(v) * pot.f(v) - 2.0 * k * fpp * (E - k * pot.F(v))
    return float(np.max(np.abs(v4)))


def fd_tolerance(solution: RotatingSolution, grid: PolarGrid) -> float:
    """Truncation allowance for the polar five-point Laplacian of u = v(a.x).

    The Cartesian part scales with h^2 max|v''''|; the polar chain rule adds
    terms of size (dt^2 + dtheta^2) |a| max|v'| / r that peak on the innermost
    circle.  Both carry a safety factor of two.
    """
    h = grid.R * max(grid.dt, grid.dtheta)
    vmax = float(np.max(solution.velocity(np.linspace(0.0, solution.potential.period, 4097))))
    polar = (grid.dt**2 + grid.dtheta**2) * vmax / np.sqrt(solution.kappa) / grid.radii[0]
    return h * h * fourth_derivative_bound(solution) / 3.0 + polar / 3.0


@dataclass
class PlanarCheck:
    pde_residual: float
    linear_bound: float
    monotonicity_min: float
    orthogonal_max: float
    h_max: float


def planar_field(solution: RotatingSolution, direction, grid: PolarGrid) -> tuple[ScalarField, np.ndarray]:
    e = np.asarray(direction, dtype=float)
    e = e / np.linalg.norm(e)
    a = e / np.sqrt(solution.kappa)
    rr, tt = np.meshgrid(grid.radii, grid.theta, indexing="ij")
    x, y = rr * np.cos(tt), rr * np.sin(tt)
    return ScalarField(grid, solution(a[0] * x + a[1] * y)), a


def planar_extension_check(
    solution: RotatingSolution,
    direction,
    grid: PolarGrid,
    probe_angles=None,
    step: float = 1e-4,
) -> PlanarCheck:
    """Build u(x) = v(a.x) on a disk grid and measure the statements of the
    one-dimensional classification.

    ``monotonicity_min`` is the minimum over nodes and over probe directions e
    with e.a > 0 of the symmetric difference quotient of u along e;
    ``orthogonal_max`` is the largest |e.grad u| for e perpendicular to a.
    """
    u, a = planar_field(solution, direction, grid)
    lap = laplacian(u).values
    interior = np.isfinite(lap)
    pde = float(np.max(np.abs(lap[interior] + solution.potential.f(u.values[interior]))))

    rr, tt = np.meshgrid(grid.radii, grid.theta, indexing="ij")
    x, y = rr * np.cos(tt), rr * np.sin(tt)
    s = a[0] * x + a[1] * y
    linear = float(np.max(np.abs(u.values - solution.mean_slope * s)))

    base = np.arctan2(a[1], a[0])
    if probe_angles is None:
        probe_angles = np.linspace(-0.45 * np.pi, 0.45 * np.pi, 7)

    def dderiv(ang):
        ev = np.array([np.cos(base + ang), np.sin(base + ang)])
        sp_ = a[0] * (x + step * ev[0]) + a[1] * (y + step * ev[1])
        sm_ = a[0] * (x - step * ev[0]) + a[1] * (y - step * ev[1])
        return (solution(sp_) - solution(sm_)) / (2 * step)

    mono = min(float(np.min(dderiv(ang))) for ang in probe_angles)
    ortho = max(float(np.max(np.abs(dderiv(sign * np.pi / 2)))) for sign in (1, -1))
    h_max = float(grid.R * max(grid.dt, grid.dtheta))
    return PlanarCheck(pde, linear, mono, ortho, h_max)
