"""Periodic grid, continuum-scaled FFT pair and Fourier multipliers.

The discrete transform mimics the continuum pair

    u_hat(xi) = int e^{-i x.xi} u(x) dx,
    u(x)      = (2 pi)^{-2} int e^{i x.xi} u_hat(xi) dxi,

on the torus [-L/2, L/2)^2 sampled at x_j = -L/2 + j dx.  The forward
transform carries dx^2, the inverse carries (2 pi)^{-2} dxi^2 = 1/L^2, so
formulas written for R^2 can be used with their constants unchanged.
Spectral arrays are kept in natural FFT order (no fftshift).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Union

import numpy as np
import scipy.fft as sfft

from .errors import ConfigurationError, NumericError, UsageError

PHYSICAL = "physical"
SPECTRAL = "spectral"

Symbol = Union[Callable[[np.ndarray, np.ndarray], np.ndarray], np.ndarray, complex, float]


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Square periodic grid with ``n`` points per axis and side ``extent``."""

    n: int
    extent: float

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or isinstance(self.n, bool):
            raise ConfigurationError(f"grid size must be an integer, got {self.n!r}")
        if self.n < 8 or not _is_pow2(int(self.n)):
            raise ConfigurationError(f"grid size must be a power of two >= 8, got {self.n}")
        if not np.isfinite(self.extent) or self.extent <= 0:
            raise ConfigurationError(f"extent must be positive, got {self.extent}")

    @property
    def dx(self) -> float:
        return self.extent / self.n

    @property
    def dxi(self) -> float:
        return 2.0 * np.pi / self.extent

    @property
    def nyquist(self) -> float:
        return np.pi * self.n / self.extent

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    @cached_property
    def x(self) -> np.ndarray:
        """1D physical coordinates, -L/2 + j dx."""
        return -0.5 * self.extent + self.dx * np.arange(self.n)

    @cached_property
    def freqs(self) -> np.ndarray:
        """1D signed frequencies 2 pi k / L in natural FFT order."""
        return self.dxi * np.fft.fftfreq(self.n, d=1.0 / self.n)

    @cached_property
    def xx(self) -> tuple[np.ndarray, np.ndarray]:
        return tuple(np.meshgrid(self.x, self.x, indexing="ij"))

    @cached_property
    def kk(self) -> tuple[np.ndarray, np.ndarray]:
        return tuple(np.meshgrid(self.freqs, self.freqs, indexing="ij"))

    @cached_property
    def r2(self) -> np.ndarray:
        x1, x2 = self.xx
        return x1**2 + x2**2

    @cached_property
    def k2(self) -> np.ndarray:
        k1, k2 = self.kk
        return k1**2 + k2**2

    @cached_property
    def kabs(self) -> np.ndarray:
        return np.sqrt(self.k2)

    @cached_property
    def bracket(self) -> np.ndarray:
        """<xi> = sqrt(1 + |xi|^2) on the lattice."""
        return np.sqrt(1.0 + self.k2)

    @cached_property
    def _phase_sign(self) -> np.ndarray:
        # e^{-i x_j xi_k} = (-1)^k e^{-2 pi i jk/n} because x_0 = -L/2
        k = np.fft.fftfreq(self.n, d=1.0 / self.n).astype(int)
        s = np.where(k % 2 == 0, 1.0, -1.0)
        return np.multiply.outer(s, s)

    # array-level transforms; the Field API below wraps these
    def fft(self, values: np.ndarray) -> np.ndarray:
        return (self.dx**2) * self._phase_sign * sfft.fft2(values, axes=(-2, -1))

    def ifft(self, spec: np.ndarray) -> np.ndarray:
        return sfft.ifft2(self._phase_sign * spec, axes=(-2, -1)) / (self.dx**2)

    def integrate(self, values: np.ndarray) -> complex:
        return values.sum(axis=(-2, -1)) * self.dx**2


def make_grid(n_per_dim: int, extent: float) -> Grid:
    if isinstance(n_per_dim, np.integer):
        n_per_dim = int(n_per_dim)
    return Grid(n_per_dim, float(extent))


@dataclass(frozen=True, eq=False)
class Field:
    """Complex state on a grid, tagged with the space it lives in.

    Operations never mutate ``values``; they return new Fields.
    """

    grid: Grid
    values: np.ndarray
    space: str = PHYSICAL

    def __post_init__(self):
        if self.space not in (PHYSICAL, SPECTRAL):
            raise UsageError(f"unknown space tag {self.space!r}")
        vals = np.asarray(self.values, dtype=complex)
        if vals.size != self.grid.n**2:
            raise UsageError(f"expected {self.grid.n ** 2} values, got {vals.size}")
        object.__setattr__(self, "values", vals.reshape(self.grid.shape))

    @classmethod
    def from_function(cls, grid: Grid, func: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> "Field":
        x1, x2 = grid.xx
        return cls(grid, func(x1, x2), PHYSICAL)

    @classmethod
    def zeros(cls, grid: Grid, space: str = PHYSICAL) -> "Field":
        return cls(grid, np.zeros(grid.shape, dtype=complex), space)

    @property
    def is_physical(self) -> bool:
        return self.space == PHYSICAL

    def physical(self) -> "Field":
        return self if self.is_physical else to_physical(self)

    def spectral(self) -> "Field":
        return self if not self.is_physical else to_spectral(self)

    def _binary(self, other, op):
        if isinstance(other, Field):
            if other.grid != self.grid:
                raise UsageError("fields live on different grids")
            if other.space != self.space:
                raise UsageError(f"cannot combine {self.space} and {other.space} fields")
            other = other.values
        return Field(self.grid, op(self.values, other), self.space)

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    __radd__ = __add__
    __rmul__ = __mul__

    def __neg__(self):
        return Field(self.grid, -self.values, self.space)

    def conj(self) -> "Field":
        if not self.is_physical:
            raise UsageError("conjugation is defined on physical fields")
        return Field(self.grid, np.conj(self.values), self.space)

    def abs2(self) -> "Field":
        if not self.is_physical:
            raise UsageError("|u|^2 is defined on physical fields")
        return Field(self.grid, np.abs(self.values) ** 2, self.space)

    def shift(self, j1: int, j2: int) -> "Field":
        """Translate by a lattice vector (j1 dx, j2 dx)."""
        f = self.physical()
        return Field(self.grid, np.roll(f.values, (j1, j2), axis=(0, 1)), PHYSICAL)


def to_spectral(f: Field) -> Field:
    if not f.is_physical:
        raise UsageError("to_spectral expects a physical-space field")
    return Field(f.grid, f.grid.fft(f.values), SPECTRAL)


def to_physical(f: Field) -> Field:
    if f.is_physical:
        raise UsageError("to_physical expects a spectral-space field")
    return Field(f.grid, f.grid.ifft(f.values), PHYSICAL)


def evaluate_symbol(grid: Grid, symbol: Symbol) -> np.ndarray:
    """Sample ``symbol`` on the full frequency lattice (natural order).

    Raises NumericError naming the first lattice frequency where the
    symbol is not finite.
    """
    if callable(symbol):
        k1, k2 = grid.kk
        vals = np.asarray(symbol(k1, k2))
    else:
        vals = np.asarray(symbol)
    vals = np.broadcast_to(vals, grid.shape)
    bad = ~np.isfinite(vals)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise NumericError(
            f"symbol is not finite at xi=({grid.freqs[i]:.6g}, {grid.freqs[j]:.6g}): {vals[i, j]}"
        )
    return vals


def apply_multiplier(f: Field, symbol: Symbol) -> Field:
    """m(D) f: multiply the spectrum by ``symbol``; result stays in f's space."""
    vals = evaluate_symbol(f.grid, symbol)
    out = Field(f.grid, f.spectral().values * vals, SPECTRAL)
    return to_physical(out) if f.is_physical else out


def l2_norm(f: Field) -> float:
    """Continuum-scaled L^2 norm, computed in whichever space f lives in."""
    g = f.grid
    if f.is_physical:
        return float(np.sqrt(np.sum(np.abs(f.values) ** 2) * g.dx**2))
    return float(np.sqrt(np.sum(np.abs(f.values) ** 2)) / g.extent)
