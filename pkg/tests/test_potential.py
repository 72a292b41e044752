import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polygrowth.potential import (
    make_cosine_series,
    make_sine_gordon,
    make_zero,
    potential_from_config,
)

coeff_lists = st.lists(st.floats(-2.0, 2.0, allow_nan=False), min_size=1, max_size=5)
points = st.floats(-50.0, 50.0, allow_nan=False)


def test_sine_gordon_values():
    p = make_sine_gordon()
    u = np.array([0.0, np.pi / 2, np.pi])
    np.testing.assert_allclose(p.F(u), [0.0, 1.0, 2.0], atol=1e-15)
    np.testing.assert_allclose(p.f(u), np.sin(u))
    assert p.osc == 2.0
    assert p.period == pytest.approx(2 * np.pi)
    assert p.even


def test_zero_potential_is_identically_zero():
    p = make_zero()
    u = np.linspace(-10, 10, 7)
    assert not np.any(p.F(u)) and not np.any(p.f(u)) and not np.any(p.fprime(u))
    assert p.is_zero and p.osc == 0.0


def test_cosine_series_single_term_matches_sine_gordon():
    a, b = make_cosine_series([1.0]), make_sine_gordon()
    u = np.linspace(-7, 7, 101)
    np.testing.assert_allclose(a.F(u), b.F(u), atol=1e-15)
    np.testing.assert_allclose(a.f(u), b.f(u), atol=1e-15)
    assert a.osc == pytest.approx(2.0, rel=1e-6)


def test_empty_series_is_zero():
    p = make_cosine_series([])
    assert p.is_zero
    assert np.all(p.F(np.array([1.0, 2.0])) == 0)


@settings(max_examples=40, deadline=None)
@given(coeff_lists, points)
def test_f_is_derivative_of_F(coeffs, u):
    p = make_cosine_series(coeffs)
    h = 1e-5
    fd = (p.F(np.array(u + h)) - p.F(np.array(u - h))) / (2 * h)
    assert abs(fd - p.f(np.array(u))) <= 1e-6 * (1 + sum(abs(c) for c in coeffs) * 25)
    fd2 = (p.f(np.array(u + h)) - p.f(np.array(u - h))) / (2 * h)
    assert abs(fd2 - p.fprime(np.array(u))) <= 1e-6 * (1 + sum(abs(c) for c in coeffs) * 125)


@settings(max_examples=40, deadline=None)
@given(coeff_lists, points)
def test_periodic_and_even(coeffs, u):
    p = make_cosine_series(coeffs)
    T = p.period
    assert p.F(np.array(u + T)) == pytest.approx(float(p.F(np.array(u))), abs=1e-9)
    assert p.F(np.array(-u)) == pytest.approx(float(p.F(np.array(u))), abs=1e-9)
    assert p.f(np.array(-u)) == pytest.approx(-float(p.f(np.array(u))), abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(coeff_lists)
def test_osc_bounds_sampled_range(coeffs):
    p = make_cosine_series(coeffs)
    u = np.linspace(0, 2 * np.pi, 997)
    vals = p.F(u)
    assert vals.max() - vals.min() <= p.osc + 1e-6
    assert p.osc >= 0


def test_vectorised_shapes():
    p = make_cosine_series([0.5, 0.25])
    u = np.zeros((3, 4))
    assert p.F(u).shape == (3, 4)
    assert p.f(u).shape == (3, 4)


def test_config_round_trip():
    for p in (make_sine_gordon(), make_zero(), make_cosine_series([0.3, 0.1])):
        q = potential_from_config(p.to_config())
        u = np.linspace(-3, 3, 11)
        np.testing.assert_array_equal(p.F(u), q.F(u))
    assert potential_from_config("sine_gordon").name == "sine_gordon"
    with pytest.raises(ValueError):
        potential_from_config({"kind": "quartic"})
