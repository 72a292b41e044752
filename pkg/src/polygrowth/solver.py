"""Sector minimiser u^R, odd-symmetric extension to the disk, continuation in R.

The discrete functional is

    E(u) = 1/2 u.A u - sum_i m_i F(u_i)

whose Euler-Lagrange equation is the five-point discretisation of
-Lap u = F'(u).  Iterates are stored as ``u = phi + w`` with ``w = 0`` on the
boundary; the tuned stencil makes ``A phi`` vanish up to roundoff so energy
differences are computed without cancellation even when phi ~ R^d is huge.
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .geometry import (
    DISK,
    SECTOR,
    GridMismatchError,
    PolarGrid,
    ScalarField,
    SectorDomain,
    gradient_energy_annulus,
    harmonic_polynomial,
    potential_integral_annulus,
)
from .potential import PeriodicPotential

log = logging.getLogger(__name__)

EPS = np.finfo(float).eps


class ValidationError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    """Raised when Newton and the flow fallback both fail; carries the best iterate."""

    def __init__(self, message, field=None, report=None, partial=None):
        super().__init__(message)
        self.field = field
        self.report = report
        self.partial = partial or []


@dataclass
class SolveOptions:
    newton_tol: float = 1e-9
    max_newton_iters: int = 300
    line_search: bool = True
    flow_fallback: bool = True
    flow_step: float = 0.5
    flow_steps: int = 20
    positivity_projection: bool = True
    linear_solver: str = "direct"  # "direct" (sparse LU) or "cg" (Jacobi PCG)
    cg_tol: float = 1e-10
    cg_maxiter: int = 20000
    allow_uneven: bool = False

    def __post_init__(self):
        if not self.newton_tol > 0:
            raise ValidationError("newton_tol must be positive")
        if not self.flow_step > 0:
            raise ValidationError("flow_step must be positive")
        if self.linear_solver not in ("direct", "cg"):
            raise ValidationError(f"unknown linear solver {self.linear_solver!r}")


@dataclass
class SolveReport:
    iterations: int
    final_residual: float
    energy: float
    converged: bool
    min_value_interior: float
    tolerance: float = 0.0
    roundoff_floor: float = 0.0
    energy_phi: float = 0.0
    energy_history: list = field(default_factory=list)
    steps: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "iterations": self.iterations,
            "final_residual": self.final_residual,
            "energy": self.energy,
            "converged": self.converged,
            "min_value_interior": self.min_value_interior,
            "tolerance": self.tolerance,
            "roundoff_floor": self.roundoff_floor,
            "energy_phi": self.energy_phi,
        }


def pcg(A, b, tol=1e-10, maxiter=20000, x0=None):
    """Jacobi-preconditioned conjugate gradients.

    Returns ``(x, info)`` with ``info`` one of ``"converged"``, ``"maxiter"``,
    ``"negative_curvature"``.  On negative curvature the current iterate is
    returned (it is still a descent direction for -b when started from 0).
    """
    diag = A.diagonal()
    if np.any(diag <= 0):
        return np.zeros_like(b), "negative_curvature"
    minv = 1.0 / diag
    x = np.zeros_like(b) if x0 is None else x0.copy()
    r = b - A @ x
    z = minv * r
    p = z.copy()
    rz = r @ z
    bnorm = np.linalg.norm(b)
    if bnorm == 0:
        return x, "converged"
    for _ in range(maxiter):
        Ap = A @ p
        curv = p @ Ap
        if curv <= 0:
            return x, "negative_curvature"
        alpha = rz / curv
        x += alpha * p
        r -= alpha * Ap
        if np.linalg.norm(r) <= tol * bnorm:
            return x, "converged"
        z = minv * r
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    return x, "maxiter"


class _SectorProblem:
    """Discrete functional on the interior unknowns of a sector grid."""

    def __init__(self, potential: PeriodicPotential, grid: PolarGrid, phi: np.ndarray):
        self.potential = potential
        self.grid = grid
        self.phi = phi
        self.sl = grid.interior_slice()
        self.P = phi[self.sl]
        self.m = grid.interior_mass()
        self.A = grid.stiffness_matrix()
        self.Aphi = grid.stiffness_apply(phi)
        self.shape = grid.interior_shape

    def full(self, w: np.ndarray) -> np.ndarray:
        u = self.phi.copy()
        u[self.sl] = self.P + w
        return u

    def gradient(self, w):
        u = self.P + w
        return (self.A @ w.ravel()).reshape(self.shape) + self.Aphi - self.m * self.potential.f(u)

    def residual(self, u_full: np.ndarray) -> float:
        """max |Lap_h u + f(u)| over interior nodes, evaluated on the stored field."""
        g = self.grid
        lap = -g.stiffness_apply(u_full) / self.m
        return float(np.max(np.abs(lap + self.potential.f(u_full[self.sl]))))

    def roundoff_floor(self, u_full: np.ndarray) -> float:
        scale = self.grid.stiffness_abs_apply(u_full) / self.m + np.abs(u_full[self.sl])
        return float(4 * EPS * np.max(scale))

    def energy_diff(self, w) -> float:
        """E(phi + w) - E(phi)."""
        F = self.potential.F
        quad = 0.5 * w.ravel() @ (self.A @ w.ravel())
        return float(quad + np.sum(w * self.Aphi) - np.sum(self.m * (F(self.P + w) - F(self.P))))

    def hessian(self, w, shift=0.0):
        """Hessian of the functional plus ``shift`` times the mass matrix."""
        diag = self.m * (shift - self.potential.fprime(self.P + w))
        return (self.A + sp.diags(diag.ravel())).tocsc()


def discrete_energy(u: ScalarField, potential: PeriodicPotential) -> float:
    """Value of the discrete functional 1/2 int |grad u|^2 - int F(u) on the whole grid."""
    g = u.grid
    return gradient_energy_annulus(u, g.radii[0], g.R) - potential_integral_annulus(
        u, potential, g.radii[0], g.R
    )


def _validate(potential, domain, grid, opts):
    if not potential.even and not opts.allow_uneven:
        raise ValidationError("the sector construction needs an even potential (use allow_uneven to override)")
    if grid.mode != SECTOR:
        raise ValidationError("solve_sector needs a sector-mode grid")
    if grid.d != domain.d or not np.isclose(grid.R, domain.R, rtol=1e-12):
        raise ValidationError("grid does not match the sector domain")


def _damped_direction(prob, w, g, mu, opts):
    """Solve (H + mu M) p = -g; returns None unless p is a finite descent direction."""
    H = prob.hessian(w, shift=mu)
    rhs = -g.ravel()
    if opts.linear_solver == "direct":
        try:
            p = spla.splu(H).solve(rhs)
        except RuntimeError:
            return None
    else:
        p, info = pcg(H, rhs, opts.cg_tol, opts.cg_maxiter)
        if info == "negative_curvature":
            return None
    if not np.all(np.isfinite(p)) or g.ravel() @ p >= 0:
        return None
    return p.reshape(prob.shape)


def _flow(prob, w, opts, nsteps):
    """Semi-implicit gradient flow: (M + tau A) w_new = M w - tau (A phi - M f(u))."""
    tau = opts.flow_step
    M = sp.diags(prob.m.ravel())
    lu = spla.splu((M + tau * prob.A).tocsc())
    for _ in range(nsteps):
        u = prob.P + w
        rhs = prob.m * w - tau * (prob.Aphi - prob.m * prob.potential.f(u))
        w = lu.solve(rhs.ravel()).reshape(prob.shape)
        if opts.positivity_projection:
            w = np.abs(prob.P + w) - prob.P
    return w


def solve_sector(
    potential: PeriodicPotential,
    domain: SectorDomain,
    grid: PolarGrid,
    opts: SolveOptions | None = None,
    initial: ScalarField | np.ndarray | None = None,
) -> tuple[ScalarField, SolveReport]:
    """Minimise the discrete functional on D_R with u = phi on the boundary.

    Raises ConvergenceError (carrying the best iterate) if the residual
    certificate is not reached within ``max_newton_iters``.
    """
    opts = opts or SolveOptions()
    _validate(potential, domain, grid, opts)
    phi = harmonic_polynomial(domain.d, grid).values
    prob = _SectorProblem(potential, grid, phi)

    if initial is None:
        w = np.zeros(prob.shape)
    else:
        init = initial.values if isinstance(initial, ScalarField) else np.asarray(initial, float)
        w = init[prob.sl] - prob.P
    if opts.positivity_projection:
        w = np.abs(prob.P + w) - prob.P

    e_phi = discrete_energy(ScalarField(grid, phi), potential)
    history = [prob.energy_diff(w)]
    steps: list[str] = []
    best = (np.inf, w)
    tol = res = floor = np.inf
    flow_used = 0
    it = 0
    mu = 0.0
    # with this shift the damped Hessian dominates A and is positive definite
    fp_sample = potential.fprime(np.linspace(0.0, potential.period, 4096))
    mu_max = float(np.max(np.abs(fp_sample))) * 1.01 + 1e-12
    for it in range(opts.max_newton_iters + 1):
        u_full = prob.full(w)
        res = prob.residual(u_full)
        floor = prob.roundoff_floor(u_full)
        tol = max(opts.newton_tol, floor)
        if res < best[0]:
            best = (res, w)
        if res <= tol or it == opts.max_newton_iters:
            break
        g = prob.gradient(w)
        e0 = history[-1]
        noise = 64 * EPS * float(
            np.sum(prob.m * np.abs(potential.F(prob.P + w))) + np.sum(np.abs(w * prob.Aphi))
        )
        accepted = False
        while True:
            p = _damped_direction(prob, w, g, mu, opts)
            min_alpha = 1.0 if mu < mu_max else 1e-12
            alpha = 1.0
            while p is not None and alpha >= min_alpha:
                w_try = w + alpha * p
                if opts.positivity_projection:
                    w_try = np.abs(prob.P + w_try) - prob.P
                e_try = prob.energy_diff(w_try)
                if not opts.line_search or e_try <= e0 + 1e-4 * alpha * float(g.ravel() @ p.ravel()) + noise:
                    accepted = True
                    break
                alpha *= 0.5
            if accepted or mu >= mu_max:
                break
            mu = min(mu_max, max(4 * mu, 1e-3))
        kind = f"mu={mu:.3g}"
        if accepted and alpha == 1.0:
            mu = mu / 4 if mu > 1e-6 else 0.0
        if accepted:
            w = w_try
            steps.append(f"{kind}:{alpha:g}")
        elif opts.flow_fallback and flow_used < 10:
            w = _flow(prob, w, opts, opts.flow_steps)
            flow_used += 1
            steps.append("flow")
        else:
            break
        history.append(prob.energy_diff(w))
        log.debug("iter %d residual %.3e step %s dE %.6e", it, res, steps[-1], history[-1])

    converged = res <= tol
    if not converged:
        w = best[1]
    u_full = prob.full(w)
    res = prob.residual(u_full)
    field_out = ScalarField(grid, u_full)
    report = SolveReport(
        iterations=it,
        final_residual=res,
        energy=e_phi + prob.energy_diff(w),
        converged=converged,
        min_value_interior=float(np.min(u_full[prob.sl])),
        tolerance=float(tol),
        roundoff_floor=float(floor),
        energy_phi=e_phi,
        energy_history=history,
        steps=steps,
    )
    if not converged:
        raise ConvergenceError(
            f"no convergence after {it} iterations (residual {res:.3e} > {tol:.3e})", field_out, report
        )
    return field_out, report


def extend_by_symmetry(sector_field: ScalarField, d: int, disk_grid: PolarGrid | None = None) -> ScalarField:
    """Extend a sector field to the disk by u(theta + pi/d) = -u(theta).

    Values are copied with sign flips, never recomputed.
    """
    sg = sector_field.grid
    dg = disk_grid or sg.disk_companion()
    if sg.mode != SECTOR or dg.mode != DISK:
        raise GridMismatchError("need a sector field and a disk grid")
    n = sg.ntheta
    if dg.ntheta != 2 * d * n or sg.d != d or dg.nr != sg.nr or not np.allclose(dg.radii, sg.radii, rtol=1e-14):
        raise GridMismatchError("disk grid is incompatible with the sector grid")
    shifted = (np.arange(dg.ntheta) + n // 2) % dg.ntheta
    block, s = np.divmod(shifted, n)
    sign = np.where(block % 2 == 0, 1.0, -1.0)
    values = sector_field.values[:, s] * sign
    # block boundaries are nodal rays; copy the +0.0 of the sector ray exactly
    values[:, s == 0] = 0.0
    return ScalarField(dg, values)


@dataclass
class CauchyTable:
    radii: list
    probe_radius: float
    deltas: list

    def to_json(self):
        return asdict(self)


def nested_grids(d: int, radii, nr: int, ntheta: int, stencil: str = "tuned") -> list[PolarGrid]:
    """Sector grids for each R sharing r_min and dt, so their circles coincide.

    ``nr`` sets the radial resolution of the first grid (r_min = radii[0]*1e-3).
    """
    radii = [float(r) for r in radii]
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValidationError("radii must be strictly increasing")
    dt0 = np.log(1e3) / nr
    if len(radii) > 1:
        base = np.log(radii[1] / radii[0])
        dt = base / max(1, round(base / dt0))
    else:
        dt = dt0
    n0 = round(np.log(1e3) / dt)
    r_min = radii[0] * np.exp(-n0 * dt)
    grids = []
    for R in radii:
        steps = np.log(R / r_min) / dt
        if abs(steps - round(steps)) > 1e-6:
            raise ValidationError("continuation radii must be commensurate with a common geometric grid")
        grids.append(PolarGrid.sector(d, R, int(round(steps)), ntheta, r_min=r_min, stencil=stencil))
    return grids


def continuation(
    potential: PeriodicPotential,
    d: int,
    radii,
    opts: SolveOptions | None = None,
    nr: int = 256,
    ntheta: int = 128,
    stencil: str = "tuned",
):
    """Solve at each R, warm-starting from the previous solution (phi on the new annulus).

    Returns ``(results, table)`` where results is a list of (field, report) and
    table.deltas[m] = sup over B_{radii[0]/2} of |u^{R_{m+1}} - u^{R_m}|.
    """
    radii = list(radii)
    if len(radii) < 2:
        raise ValidationError("continuation needs at least two radii")
    grids = nested_grids(d, radii, nr, ntheta, stencil)
    results = []
    prev = None
    for R, grid in zip(radii, grids):
        init = None
        if prev is not None:
            init = harmonic_polynomial(d, grid).values
            n_old = prev.grid.nr
            init[: n_old + 1] = prev.values
        try:
            u, rep = solve_sector(potential, SectorDomain(d, R), grid, opts, init)
        except ConvergenceError as exc:
            exc.partial = results
            raise
        results.append((u, rep))
        prev = u
    probe = radii[0] / 2
    i_probe = int(np.searchsorted(grids[0].radii, probe, side="right"))
    deltas = [
        float(np.max(np.abs(b.values[:i_probe] - a.values[:i_probe])))
        for (a, _), (b, _) in zip(results, results[1:])
    ]
    return results, CauchyTable(radii, probe, deltas)
