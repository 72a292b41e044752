import warnings

import numpy as np
import pytest
from scipy.special import j1

from polygrowth import analysis as an
from polygrowth.geometry import PolarGrid, ScalarField, harmonic_polynomial
from polygrowth.harmonic import AliasingError
from polygrowth.potential import make_sine_gordon, make_zero

SG = make_sine_gordon()


def synthetic(d, vfun, nt=64, n=128, t0=-1.0, t1=2.0):
    t = np.linspace(t0, t1, nt)
    th = 2 * np.pi * np.arange(n) / n
    T, TH = np.meshgrid(t, th, indexing="ij")
    return an.profile_from_function(t, th, vfun(T, TH), d)


def test_profile_of_phi_is_cos():
    g = PolarGrid.disk(3, 10.0, 50, 48)
    prof = an.to_polar_profile(harmonic_polynomial(3, g), 3)
    np.testing.assert_allclose(prof.v, np.cos(3 * prof.theta)[None, :].repeat(51, 0), atol=1e-13)
    np.testing.assert_allclose(np.diff(prof.t), prof.dt, atol=1e-12)
    zero = an.to_polar_profile(ScalarField(g, np.zeros(g.shape)), 3)
    assert not np.any(zero.v)


def test_profile_requires_disk():
    g = PolarGrid.sector(2, 1.0, 8, 8)
    with pytest.raises(an.GradingError):
        an.to_polar_profile(harmonic_polynomial(2, g), 2)
    with pytest.raises(an.GradingError):
        an.profile_from_function([0.0, 0.1, 0.3], [0.0], np.zeros((3, 1)), 2)


def test_fourier_modes_examples():
    d = 4
    prof = synthetic(d, lambda T, TH: np.cos(d * TH) + 0.1 * np.cos(3 * d * TH))
    modes = an.fourier_modes(prof, 3 * d + 2)
    np.testing.assert_allclose(modes[d].c, 1.0, atol=1e-12)
    np.testing.assert_allclose(modes[3 * d].c, 0.1, atol=1e-12)
    others = [m for m in modes if m.j not in (d, 3 * d)]
    assert max(np.max(np.abs(m.c)) for m in others) < 1e-12
    with pytest.raises(AliasingError):
        an.fourier_modes(prof, 64)


def test_reconstruction():
    prof = synthetic(2, lambda T, TH: np.exp(-T) * np.cos(2 * TH) + 0.3 * np.cos(6 * TH) * T + 0.2)
    n = prof.v.shape[1]
    modes = an.fourier_modes(prof, n // 2 - 1)
    rec = sum(m.c[:, None] * np.cos(m.j * prof.theta)[None, :] for m in modes)
    assert np.max(np.abs(rec - prof.v)) < 1e-10


def test_sine_part_rejected():
    prof = synthetic(2, lambda T, TH: np.cos(2 * TH) + 1e-6 * np.sin(TH))
    with pytest.raises(an.SymmetryError):
        an.fourier_modes(prof, 8)


def test_selection_rule():
    d = 3
    clean = an.fourier_modes(synthetic(d, lambda T, TH: np.cos(d * TH)), 3 * d)
    assert an.selection_rule_check(clean, d) < 1e-14
    broken = an.fourier_modes(synthetic(d, lambda T, TH: np.cos(d * TH) + 1e-3 * np.cos(TH)), 3 * d)
    assert an.selection_rule_check(broken, d) == pytest.approx(1e-3, rel=1e-9)
    with pytest.raises(an.PreconditionError):
        an.selection_rule_check(clean[: 2 * d], d)
    assert an.allowed_mode(9, 3) and not an.allowed_mode(6, 3) and not an.allowed_mode(0, 3)


def test_decay_fit_examples():
    t = np.linspace(0, 5, 41)
    fit = an.decay_fit(t, np.exp(-2 * t), (0, 5))
    assert fit.exponent == pytest.approx(-2, abs=1e-10) and fit.n_samples == 41
    fit = an.decay_fit(t, 5 * np.exp(-0.5 * t), (1, 4))
    assert fit.exponent == pytest.approx(-0.5, abs=1e-12)
    assert fit.log_constant == pytest.approx(np.log(5), abs=1e-12)
    assert fit.residual < 1e-12


def test_decay_fit_floor_and_errors():
    t = np.linspace(0, 5, 41)
    with pytest.raises(an.InsufficientSamplesError):
        an.decay_fit(t, np.exp(-2 * t), (0, 5), noise_floor=1.0)
    # floor discards the tail
    fit = an.decay_fit(t, np.exp(-2 * t), (0, 5), noise_floor=1e-4)
    assert fit.n_samples < 41 and fit.exponent == pytest.approx(-2, abs=1e-10)
    with pytest.raises(ValueError):
        an.decay_fit(t, t, (3, 1))


def test_envelope_fit_handles_oscillation():
    t = np.linspace(0, 6, 601)
    vals = np.exp(-1.5 * t) * np.cos(8 * t)
    fit = an.decay_fit(t, vals, (0.5, 5.5), envelope=True)
    assert fit.exponent == pytest.approx(-1.5, abs=0.1)


def test_oscillatory_integral_zero_potential():
    prof = synthetic(4, lambda T, TH: np.cos(4 * TH))
    m = an.oscillatory_integral(prof, make_zero(), 4)
    assert not np.any(m.g) and not np.any(m.I)


def test_frozen_profile_matches_bessel():
    d = 4
    n = 2**14
    t = np.linspace(0, 1.2, 61)
    th = 2 * np.pi * np.arange(n) / n
    prof = an.profile_from_function(t, th, np.tile(np.cos(d * th), (len(t), 1)), d)
    m = an.oscillatory_integral(prof, SG, d)
    # int sin(x cos(d theta)) cos(d theta) dtheta = 2 pi J_1(x)
    np.testing.assert_allclose(m.I, 2 * np.pi * j1(np.exp(d * t)), atol=1e-12)
    np.testing.assert_allclose(m.g, np.exp((2 - d) * t) * m.I)
    assert not m.degenerate.any()


def test_degenerate_phase_flagged():
    prof = synthetic(2, lambda T, TH: np.cos(2 * TH) * (T > 0) + 0.01 * np.cos(2 * TH) * (T <= 0))
    with pytest.warns(an.DegeneratePhaseWarning):
        m = an.oscillatory_integral(prof, SG, 2)
    assert m.degenerate[0] and not m.degenerate[-1]


def test_mode_ode_residual():
    d, j = 4, 8
    prof = synthetic(d, lambda T, TH: np.cos(d * TH), nt=200)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        m = an.oscillatory_integral(prof, make_zero(), d)
    assert an.mode_ode_residual(m, d) < 1e-12
    # homogeneous solution e^{-(d+j) t}: residual is pure truncation error, O(dt^2)
    res = []
    for nt in (100, 200):
        t = np.linspace(0, 1, nt + 1)
        c = np.exp(-(d + j) * t)
        res.append(an.mode_ode_residual(an.ModeSeries(j, t, c, np.zeros_like(t)), d))
    assert res[0] / res[1] == pytest.approx(4, rel=0.1)
    with pytest.raises(an.PreconditionError):
        an.mode_ode_residual(an.ModeSeries(j, t, c), d)


def test_growth_exponent_zero_potential_below_floor():
    g = PolarGrid.disk(2, 20.0, 64, 64)
    with pytest.raises(an.SignalBelowFloorError):
        an.growth_exponent(harmonic_polynomial(2, g), 2)


def test_growth_exponent_synthetic():
    g = PolarGrid.disk(2, 100.0, 200, 64)
    rr, tt = np.meshgrid(g.radii, g.theta, indexing="ij")
    u = harmonic_polynomial(2, g).values + 0.5 * rr**1.25 * np.cos(6 * tt)
    fit = an.growth_exponent(ScalarField(g, u), 2)
    assert fit.exponent == pytest.approx(1.25, abs=1e-10)
