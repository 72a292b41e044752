"""Run configurations and run directories (construct / analyze / oned / sweep)."""
from __future__ import annotations

import copy
import dataclasses
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis as an
from . import harmonic as hm
from .geometry import PolarGrid, ScalarField, SectorDomain, harmonic_polynomial
from .io import fmt, line_plot_svg, read_csv, read_json, update_json, write_csv, write_json
from .oned import quadrature_solution, verify_ode, first_integral_error
from .potential import PeriodicPotential, make_zero, potential_from_config
from .solver import (
    ConvergenceError,
    SolveOptions,
    SolveReport,
    ValidationError,
    continuation,
    extend_by_symmetry,
    solve_sector,
)


@dataclass
class RunConfig:
    """Everything needed to reproduce a run.

    ``ntheta`` counts angular nodes on the full disk; the sector solve uses
    ntheta / (2d) intervals, so ntheta must be a multiple of 4d.
    """

    potential: dict = field(default_factory=lambda: {"kind": "sine_gordon"})
    d: int = 2
    R: float | None = 50.0
    radii: list | None = None
    nr: int = 256
    ntheta: int | None = None
    stencil: str = "tuned"
    solver: dict = field(default_factory=dict)
    jmax: int | None = None
    window: list | None = None
    out: str | None = None
    seed: int = 0
    perturb: float = 0.0

    def __post_init__(self):
        if self.ntheta is None:
            self.ntheta = 256 * self.d
        if self.radii is not None:
            self.radii = [float(r) for r in self.radii]
            self.R = self.radii[-1]

    def validate(self) -> "RunConfig":
        if not isinstance(self.d, int) or self.d < 2:
            raise ValidationError("d must be an integer >= 2")
        if self.ntheta % (4 * self.d):
            raise ValidationError(f"ntheta = {self.ntheta} is not a multiple of 4d = {4 * self.d}")
        if self.nr < 4:
            raise ValidationError("nr must be at least 4")
        if self.R is None or not self.R > 0:
            raise ValidationError("R must be positive")
        if self.radii is not None:
            if len(self.radii) < 2 or any(b <= a for a, b in zip(self.radii, self.radii[1:])):
                raise ValidationError("radii must be an increasing list of at least two values")
        if self.window is not None:
            ra, rb = self.window
            if not 0 < ra < rb <= self.R:
                raise ValidationError("window must satisfy 0 < r_a < r_b <= R")
        if self.perturb < 0:
            raise ValidationError("perturb must be non-negative")
        try:
            potential_from_config(self.potential)
        except ValueError as exc:
            raise ValidationError(str(exc)) from None
        self.solve_options()
        return self

    @property
    def sector_ntheta(self) -> int:
        return self.ntheta // (2 * self.d)

    def solve_options(self) -> SolveOptions:
        names = {f.name for f in dataclasses.fields(SolveOptions)}
        unknown = set(self.solver) - names
        if unknown:
            raise ValidationError(f"unknown solver options: {sorted(unknown)}")
        return SolveOptions(**self.solver)

    def to_json(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**copy.deepcopy(data))


@dataclass
class Run:
    config: RunConfig
    sector: ScalarField
    disk: ScalarField
    report: dict


def _sector_grid(cfg: RunConfig) -> PolarGrid:
    return PolarGrid.sector(cfg.d, cfg.R, cfg.nr, cfg.sector_ntheta, stencil=cfg.stencil)


def solve_config(cfg: RunConfig) -> tuple[ScalarField, SolveReport, dict]:
    """Solve the configured problem; returns (sector field, report, extras)."""
    cfg.validate()
    pot = potential_from_config(cfg.potential)
    opts = cfg.solve_options()
    extras: dict = {}
    if cfg.radii is not None:
        results, table = continuation(pot, cfg.d, cfg.radii, opts, cfg.nr, cfg.sector_ntheta, cfg.stencil)
        u, rep = results[-1]
        extras["cauchy"] = table.to_json()
        return u, rep, extras
    grid = _sector_grid(cfg)
    init = None
    if cfg.perturb > 0:
        rng = np.random.default_rng(cfg.seed)
        init = harmonic_polynomial(cfg.d, grid).values
        init = init + cfg.perturb * rng.standard_normal(init.shape) * np.maximum(np.abs(init), 1.0)
    u, rep = solve_sector(pot, SectorDomain(cfg.d, cfg.R), grid, opts, init)
    return u, rep, extras


def _write_solution(out: Path, cfg: RunConfig, u: ScalarField, report: dict) -> ScalarField:
    out.mkdir(parents=True, exist_ok=True)
    disk = extend_by_symmetry(u, cfg.d)
    u.to_csv(out / "solution_sector.csv")
    disk.to_csv(out / "solution_disk.csv")
    write_json(out / "report.json", report)
    write_json(out / "config.json", cfg.to_json())
    return disk


def construct(cfg: RunConfig, out: str | Path | None = None) -> Run:
    """Solve and write solution_sector.csv, solution_disk.csv, report.json, config.json.

    On a convergence failure the best iterate is still written (converged = false)
    before the error propagates.
    """
    cfg.validate()
    out = Path(out or cfg.out or "run")
    cfg.out = str(out)
    try:
        u, rep, extras = solve_config(cfg)
    except ConvergenceError as exc:
        if exc.field is not None:
            report = {"converged": False, "error": str(exc)}
            if exc.report is not None:
                report.update(exc.report.to_json())
            _write_solution(out, cfg, exc.field, report)
        raise
    phi = harmonic_polynomial(cfg.d, u.grid).values
    report = rep.to_json()
    report["sup_u_minus_phi"] = float(np.max(np.abs(u.values - phi)))
    report["grid"] = {"nr": cfg.nr, "ntheta_sector": cfg.sector_ntheta, "ntheta_disk": cfg.ntheta,
                      "r_min": float(u.grid.r_min), "dt": u.grid.dt}
    report.update(extras)
    disk = _write_solution(out, cfg, u, report)
    return Run(cfg, u, disk, report)


def _field_from_csv(path: Path, grid: PolarGrid) -> ScalarField:
    cols = read_csv(path)
    return ScalarField(grid, cols["value"].reshape(grid.shape))


def load_run(run_dir: str | Path) -> Run:
    run_dir = Path(run_dir)
    missing = [n for n in ("config.json", "solution_sector.csv", "report.json") if not (run_dir / n).exists()]
    if missing:
        raise FileNotFoundError(f"{run_dir} is missing {', '.join(missing)}")
    cfg = RunConfig.from_json(read_json(run_dir / "config.json"))
    grid = _sector_grid(cfg)
    if cfg.radii is not None:
        from .solver import nested_grids

        grid = nested_grids(cfg.d, cfg.radii, cfg.nr, cfg.sector_ntheta, cfg.stencil)[-1]
    sector = _field_from_csv(run_dir / "solution_sector.csv", grid)
    disk = extend_by_symmetry(sector, cfg.d)
    return Run(cfg, sector, disk, read_json(run_dir / "report.json"))


# -- noise floors --------------------------------------------------------------


@dataclass
class NoiseFloor:
    """Per-circle floors from the zero-potential oracle on the same grid."""

    sup_err: np.ndarray
    mode_dev: np.ndarray
    profile_dev: np.ndarray


def zero_potential_floor(grid: PolarGrid, d: int) -> NoiseFloor:
    u0, _ = solve_sector(make_zero(), SectorDomain(d, grid.R), grid, SolveOptions())
    disk = extend_by_symmetry(u0, d)
    rnd = an.roundoff_floor(disk, d)
    sup_err = np.maximum(an.sup_deviation(disk, d), rnd)
    prof = an.to_polar_profile(disk, d)
    c = an.fourier_modes(prof, d)[d].c
    eps_v = rnd * np.exp(-d * prof.t)
    mode_dev = np.maximum(np.abs(c - 1.0), eps_v)
    profile_dev = np.maximum(np.max(np.abs(prof.v - np.cos(d * prof.theta)), axis=1), eps_v)
    return NoiseFloor(sup_err, mode_dev, profile_dev)


# -- analysis --------------------------------------------------------------------


def default_comparison_radii(R: float) -> list[float]:
    return [R / 20, R / 10, R / 5, R / 2.5]


def analyze_lemmas(run_dir: str | Path, radii=None, svg: bool = False) -> list[dict]:
    run_dir = Path(run_dir)
    run = load_run(run_dir)
    pot = potential_from_config(run.config.potential)
    radii = default_comparison_radii(run.config.R) if radii is None else list(radii)
    rows = []
    for r in radii:
        ext = hm.harmonic_extension(run.disk, r)
        rec = hm.energy_comparison_check(run.disk, ext, pot)
        cmp_ = hm.phi_r_vs_phi_check(ext, run.config.d)
        rows.append({
            "r": rec.r, "lhs": rec.lhs, "rhs_identity": rec.rhs_identity, "bound": rec.bound,
            "sup_half": hm.half_ball_deviation(run.disk, ext), "sup_diff": cmp_.sup_diff,
            "hessian_diff": cmp_.hessian_diff,
        })
    keys = list(rows[0]) if rows else ["r"]
    write_csv(run_dir / "lemmas.csv", keys, [[row[k] for row in rows] for k in keys])
    fits = {}
    if len(rows) >= 2:
        lr = np.log([row["r"] for row in rows])
        ls = np.log([max(row["sup_half"], 1e-300) for row in rows])
        fits["half_ball_slope"] = {"exponent": float(np.polyfit(lr, ls, 1)[0]), "radii": [row["r"] for row in rows]}
    update_json(run_dir / "fits.json", fits)
    if svg:
        line_plot_svg(run_dir / "lemmas.svg",
                      {"lhs": ([x["r"] for x in rows], [x["lhs"] for x in rows]),
                       "bound": ([x["r"] for x in rows], [x["bound"] for x in rows]),
                       "sup B_r/2": ([x["r"] for x in rows], [x["sup_half"] for x in rows])},
                      title="energy comparison", xlabel="r", ylabel="value", logx=True)
    return rows


def _safe_fit(fn, *args, **kwargs) -> dict:
    try:
        return fn(*args, **kwargs).to_json()
    except an.InsufficientSamplesError as exc:
        return {"error": str(exc)}


def fit_B_d(t, c, window, d) -> float:
    """Limit of c_d(t) from least squares c_d = B + K e^{(2 - 3d/2) t} on the window."""
    keep = (t >= window[0] - 1e-12) & (t <= window[1] + 1e-12)
    A = np.column_stack([np.ones(keep.sum()), np.exp((2 - 1.5 * d) * t[keep])])
    return float(np.linalg.lstsq(A, c[keep], rcond=None)[0][0])


def mode_diagnostics(disk: ScalarField, d: int, potential: PeriodicPotential, jmax: int,
                     window, floor: NoiseFloor | None) -> tuple[list[an.ModeSeries], dict]:
    prof = an.to_polar_profile(disk, d)
    modes = an.fourier_modes(prof, jmax)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", an.DegeneratePhaseWarning)
        forced = [an.oscillatory_integral(prof, potential, m.j) for m in modes]
    fl_mode = floor.mode_dev if floor is not None else 0.0
    fl_prof = floor.profile_dev if floor is not None else 0.0
    t = prof.t
    dev = np.max(np.abs(prof.v - np.cos(d * prof.theta)), axis=1)
    gd = forced[d]
    ok = ~gd.degenerate
    fits = {
        "selection_ratio": an.selection_rule_check(modes, d) if jmax >= 3 * d else None,
        "decay1": _safe_fit(an.decay_fit, t, dev, window, fl_prof),
        "decay4": _safe_fit(an.decay_fit, t, modes[d].c - 1.0, window, fl_mode),
        "g_d": _safe_fit(an.decay_fit, t[ok], gd.g[ok], window,
                         np.broadcast_to(np.asarray(fl_mode, float), t.shape)[ok], envelope=True),
        "B_d": fit_B_d(t, modes[d].c, window, d),
        "mode_ode_residual": an.mode_ode_residual(gd, d),
        "degenerate_samples": int((~ok).sum()),
        "window": list(window),
    }
    return forced, fits


def analyze_modes(run_dir: str | Path, jmax: int | None = None, svg: bool = False) -> dict:
    run_dir = Path(run_dir)
    run = load_run(run_dir)
    cfg = run.config
    d = cfg.d
    jmax = jmax or cfg.jmax or 3 * d + 2
    window = an.default_window(cfg.R) if cfg.window is None else tuple(np.log(cfg.window))
    floor = zero_potential_floor(run.sector.grid, d)
    forced, fits = mode_diagnostics(run.disk, d, potential_from_config(cfg.potential), jmax, window, floor)
    t = forced[0].t
    write_csv(run_dir / "modes.csv", ["t", "j", "c_j", "g_j"],
              [np.concatenate([m.t for m in forced]),
               np.concatenate([np.full(len(t), m.j) for m in forced]),
               np.concatenate([m.c for m in forced]),
               np.concatenate([m.g for m in forced])])
    update_json(run_dir / "fits.json", fits)
    if svg:
        curves = {"|c_d - 1|": (np.exp(t), np.abs(forced[d].c - 1)),
                  "|g_d|": (np.exp(t), np.abs(forced[d].g))}
        if 3 * d <= jmax:
            curves[f"|c_{3 * d}|"] = (np.exp(t), np.abs(forced[3 * d].c))
        line_plot_svg(run_dir / "modes.svg", curves, title="mode profiles", xlabel="r",
                      ylabel="magnitude", logx=True)
    return fits


def analyze_growth(run_dir: str | Path, svg: bool = False) -> dict:
    run_dir = Path(run_dir)
    run = load_run(run_dir)
    cfg = run.config
    floor = zero_potential_floor(run.sector.grid, cfg.d)
    err = an.sup_deviation(run.disk, cfg.d)
    write_csv(run_dir / "growth.csv", ["r", "sup_err"], [run.disk.grid.radii, err])
    window = cfg.window or (cfg.R / 20, cfg.R / 2)
    try:
        fit = an.growth_exponent(run.disk, cfg.d, window, floor.sup_err).to_json()
    except an.SignalBelowFloorError as exc:
        fit = {"error": str(exc)}
    update_json(run_dir / "fits.json", {"growth": fit})
    if svg:
        line_plot_svg(run_dir / "growth.svg", {"sup|u - phi|": (run.disk.grid.radii, err)},
                      title="growth of u - phi", xlabel="r", ylabel="sup error", logx=True)
    return fit


# -- one-dimensional runs ----------------------------------------------------------


def run_oned(potential: dict, E: float, kappa: float, out: str | Path, samples_per_period: int = 10_000) -> dict:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    sol = quadrature_solution(potential_from_config(potential), E, kappa, samples_per_period)
    write_csv(out / "profile.csv", ["s", "v"], [sol.s, sol.v])
    report = {
        "mean_slope": sol.mean_slope, "period": sol.period, "deviation": sol.deviation,
        "offset": sol.offset, "ode_residual": verify_ode(sol),
        "first_integral_error": first_integral_error(sol),
    }
    write_json(out / "report.json", report)
    write_json(out / "config.json", {"potential": potential, "E": E, "kappa": kappa,
                                     "samples_per_period": samples_per_period})
    return report


# -- sweeps -----------------------------------------------------------------------------


def sweep(base: RunConfig, param: str, values: list, out: str | Path, jobs: int = 1) -> list[dict]:
    """Construct one run per value of ``param`` under out/<param>=<value>/."""
    out = Path(out)
    cfgs = []
    for v in values:
        cfg = RunConfig.from_json(base.to_json())
        if param not in {f.name for f in dataclasses.fields(RunConfig)}:
            raise ValidationError(f"unknown sweep parameter {param!r}")
        setattr(cfg, param, v)
        if param == "d" and base.ntheta == 256 * base.d:
            cfg.ntheta = 256 * v
        cfg.out = str(out / f"{param}={v}")
        cfg.validate()
        cfgs.append(cfg)
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(jobs) as pool:
            reports = list(pool.map(_construct_report, cfgs))
    else:
        reports = [_construct_report(c) for c in cfgs]
    summary = [{"param": param, "value": v, "out": c.out, **r} for v, c, r in zip(values, cfgs, reports)]
    write_json(out / "sweep.json", summary)
    return summary


def _construct_report(cfg: RunConfig) -> dict:
    try:
        return {"converged": True, **{k: v for k, v in construct(cfg).report.items() if not isinstance(v, dict)}}
    except ConvergenceError as exc:
        return {"converged": False, "error": str(exc)}


__all__ = ["RunConfig", "Run", "construct", "load_run", "analyze_lemmas", "analyze_modes",
           "analyze_growth", "run_oned", "sweep", "zero_potential_floor", "fmt"]
