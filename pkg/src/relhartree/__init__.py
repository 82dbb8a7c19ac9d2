"""Spectral simulation and analysis of the 2D semi-relativistic Hartree
equation  -i u_t + <D> u = lambda (|x|^-gamma * |u|^2) u,  1 < gamma < 2."""

from .dynamics import InitialData, SimConfig, SimState, evolve, gauge_invariance_check, run, safe_horizon
from .errors import (
    BandError,
    BlowUpError,
    ConfigurationError,
    FitError,
    NumericError,
    RelHartreeError,
    SizeError,
    UsageError,
)
from .observables import DecayFit, TimeSeries, energy, fit_decay, mass, sobolev_norm, sup_norm
from .operators import PotentialParams, bessel_power, half_wave, hartree_term, riesz_convolve
from .spectral import PHYSICAL, SPECTRAL, Field, Grid, make_grid

__all__ = [
    "BandError",
    "BlowUpError",
    "ConfigurationError",
    "DecayFit",
    "Field",
    "FitError",
    "Grid",
    "InitialData",
    "NumericError",
    "PHYSICAL",
    "PotentialParams",
    "RelHartreeError",
    "SPECTRAL",
    "SimConfig",
    "SimState",
    "SizeError",
    "TimeSeries",
    "UsageError",
    "bessel_power",
    "energy",
    "evolve",
    "fit_decay",
    "gauge_invariance_check",
    "half_wave",
    "hartree_term",
    "make_grid",
    "mass",
    "riesz_convolve",
    "run",
    "safe_horizon",
    "sobolev_norm",
    "sup_norm",
]
