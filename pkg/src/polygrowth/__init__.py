"""Numerical study of minimal solutions of -Lap u = f(u) with polynomial growth in the plane."""

from .geometry import PolarGrid, ScalarField, SectorDomain, harmonic_polynomial
from .potential import PeriodicPotential, make_cosine_series, make_sine_gordon, make_zero, potential_from_config
from .solver import SolveOptions, continuation, extend_by_symmetry, solve_sector

__all__ = [
    "PeriodicPotential", "make_zero", "make_sine_gordon", "make_cosine_series", "potential_from_config",
    "SectorDomain", "PolarGrid", "ScalarField", "harmonic_polynomial",
    "SolveOptions", "solve_sector", "extend_by_symmetry", "continuation",
]

__version__ = "0.1.0"
