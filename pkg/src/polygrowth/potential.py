"""Periodic potentials F with derivative f = F'.

Every potential is a frozen value object carrying closed-form vectorised
evaluators, so Newton Jacobians built from them are exact.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

Evaluator = Callable[[np.ndarray], np.ndarray]

OSC_SAMPLES = 4096


@dataclass(frozen=True)
class PeriodicPotential:
    """A smooth T-periodic potential F together with f = F' and f' = F''."""

    name: str
    period: float
    even: bool
    F: Evaluator = field(repr=False)
    f: Evaluator = field(repr=False)
    fprime: Evaluator = field(repr=False)
    osc: float = 0.0
    coefficients: tuple[float, ...] = ()

    def to_config(self) -> dict:
        if self.name == "cosine_series":
            return {"kind": "cosine_series", "coefficients": list(self.coefficients)}
        return {"kind": self.name}

    @property
    def max_F(self) -> float:
        return float(_polished_extremes(self.F, self.period)[1])

    @property
    def is_zero(self) -> bool:
        return self.osc == 0.0


def _zeros(u):
    return np.zeros_like(np.asarray(u, dtype=float))


def make_zero() -> PeriodicPotential:
    return PeriodicPotential("zero", 2 * np.pi, True, _zeros, _zeros, _zeros, 0.0)


def make_sine_gordon() -> PeriodicPotential:
    """F(u) = 1 - cos u."""
    return PeriodicPotential(
        "sine_gordon",
        2 * np.pi,
        True,
        lambda u: 1.0 - np.cos(u),
        np.sin,
        np.cos,
        2.0,
        (1.0,),
    )


def make_cosine_series(coefficients: Sequence[float]) -> PeriodicPotential:
    """F(u) = sum_k a_k (1 - cos k u), k = 1, 2, ...

    An empty coefficient list gives the zero potential.
    """
    a = np.asarray(list(coefficients), dtype=float)
    if a.size == 0 or not np.any(a):
        zero = make_zero()
        return PeriodicPotential(
            "cosine_series", zero.period, True, zero.F, zero.f, zero.fprime, 0.0, tuple(a)
        )
    k = np.arange(1, a.size + 1, dtype=float)

    def F(u):
        u = np.asarray(u, dtype=float)
        return np.tensordot(1.0 - np.cos(np.multiply.outer(u, k)), a, axes=([-1], [0]))

    def f(u):
        u = np.asarray(u, dtype=float)
        return np.tensordot(np.sin(np.multiply.outer(u, k)), a * k, axes=([-1], [0]))

    def fprime(u):
        u = np.asarray(u, dtype=float)
        return np.tensordot(np.cos(np.multiply.outer(u, k)), a * k * k, axes=([-1], [0]))

    lo, hi = _polished_extremes(F, 2 * np.pi)
    osc = float(hi - lo)
    return PeriodicPotential("cosine_series", 2 * np.pi, True, F, f, fprime, osc, tuple(a))


def _polished_extremes(F: Evaluator, period: float) -> tuple[float, float]:
    """(min F, max F) over one period: dense sampling, then bounded local polishing."""
    grid = np.linspace(0.0, period, OSC_SAMPLES, endpoint=False)
    vals = F(grid)
    h = period / OSC_SAMPLES

    def polish(sign: float, idx: int) -> float:
        res = minimize_scalar(lambda x: sign * float(F(np.array(x))),
                              bounds=(grid[idx] - h, grid[idx] + h), method="bounded",
                              options={"xatol": 1e-12})
        return sign * min(res.fun, sign * vals[idx])

    return polish(1.0, int(np.argmin(vals))), polish(-1.0, int(np.argmax(vals)))


def potential_from_config(cfg: dict | str) -> PeriodicPotential:
    """Build a potential from ``{"kind": ...}`` (or a bare kind name)."""
    if isinstance(cfg, str):
        cfg = {"kind": cfg}
    kind = cfg.get("kind")
    if kind == "sine_gordon":
        return make_sine_gordon()
    if kind == "zero":
        return make_zero()
    if kind == "cosine_series":
        return make_cosine_series(cfg.get("coefficients", []))
    raise ValueError(f"unknown potential kind: {kind!r}")
