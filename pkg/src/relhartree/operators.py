"""Concrete operators: <D>^s, the half-wave group, Riesz convolution, the
Hartree nonlinearity and Littlewood-Paley projections."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np
from scipy.special import gamma as gamma_fn
from scipy.special import gammaincc

from .errors import BandError, ConfigurationError, NumericError, UsageError
from .spectral import PHYSICAL, SPECTRAL, Field, Grid, apply_multiplier, to_physical

ZeroMode = Union[str, float]


# --------------------------------------------------------------------------
# smooth bump and dyadic pieces


def _h(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


def bump_radial(r):
    """psi(r): 1 on [0, 1], 0 on [2, inf), smooth monotone transition."""
    a = _h(2.0 - np.asarray(r, dtype=float))
    b = _h(np.asarray(r, dtype=float) - 1.0)
    return a / (a + b)


def chi(k1, k2):
    return bump_radial(np.hypot(k1, k2))


def chi_dyadic(k1, k2, L):
    """chi_L(xi) = chi(xi/L) - chi(2 xi/L), supported in L/2 <= |xi| <= 2L."""
    r = np.hypot(k1, k2)
    return bump_radial(r / L) - bump_radial(2.0 * r / L)


def rho_inhom(k1, k2, N):
    """rho_1 = chi, rho_N = chi_N for N >= 2."""
    return chi(k1, k2) if N == 1 else chi_dyadic(k1, k2, N)


def is_dyadic(L: float) -> bool:
    if not np.isfinite(L) or L <= 0:
        return False
    m, _ = math.frexp(float(L))
    return m == 0.5


def resolvable_band(grid: Grid) -> tuple[float, float]:
    return 4.0 * np.pi / grid.extent, grid.nyquist / 2.0


def dyadic_scales(grid: Grid) -> list[float]:
    """All L in 2^Z inside the resolvable band, ascending."""
    lo, hi = resolvable_band(grid)
    L = 2.0 ** math.ceil(math.log2(lo))
    out = []
    while L <= hi * (1 + 1e-12):
        out.append(L)
        L *= 2.0
    return out


def _check_scale(grid: Grid, L: float, *, inhom: bool = False) -> None:
    lo, hi = resolvable_band(grid)
    if not is_dyadic(L):
        raise BandError(f"scale {L} is not a power of two")
    if inhom:
        if L < 1 or L > hi * (1 + 1e-12):
            raise BandError(f"S_N needs N in 2^N, 1 <= N <= {hi:.6g}; got {L}")
    elif L < lo * (1 - 1e-12) or L > hi * (1 + 1e-12):
        raise BandError(f"P_L needs L in the resolvable band [{lo:.6g}, {hi:.6g}]; got {L}")


def lp_project(f: Field, L: float) -> Field:
    """P_L f."""
    _check_scale(f.grid, L)
    return apply_multiplier(f, lambda k1, k2: chi_dyadic(k1, k2, L))


def lp_project_inhom(f: Field, N: int) -> Field:
    """S_N f (lowest block includes the origin)."""
    _check_scale(f.grid, N, inhom=True)
    return apply_multiplier(f, lambda k1, k2: rho_inhom(k1, k2, N))


# --------------------------------------------------------------------------
# <D> multipliers


def bessel_power(f: Field, s: float) -> Field:
    """<D>^s f = F^{-1}((1+|xi|^2)^{s/2} f_hat)."""
    g = f.grid
    with np.errstate(over="ignore"):
        sym = g.bracket**s
    return apply_multiplier(f, sym)


def half_wave(f: Field, t: float) -> Field:
    """e^{it<D>} f.  half_wave(f, -t) is the free flow."""
    return apply_multiplier(f, np.exp(1j * t * f.grid.bracket))


# --------------------------------------------------------------------------
# Riesz potential


def riesz_constant(gamma: float) -> float:
    """c_{2,gamma} with F(|x|^{-gamma}) = c_{2,gamma} |xi|^{gamma-2} in 2D."""
    return 2.0 ** (2.0 - gamma) * np.pi * gamma_fn((2.0 - gamma) / 2.0) / gamma_fn(gamma / 2.0)


@lru_cache(maxsize=64)
def torus_riesz_offset(extent: float, gamma: float, alpha_scale: float = 1.0) -> float:
    """Constant C with K_0(x) = |x|^{-gamma} + C + O(|x|^2) as x -> 0.

    K_0 is the mean-zero periodisation of |x|^{-gamma} on the torus of side
    ``extent`` (the kernel seen by the spectral convolution when the zero
    mode is dropped).  Evaluated by Ewald splitting with parameter
    alpha = alpha_scale * pi / extent^2; the result does not depend on alpha,
    and both lattice sums converge like e^{-pi |n|^2} for alpha_scale = 1.
    """
    L = float(extent)
    a = gamma / 2.0
    alpha = alpha_scale * np.pi / L**2
    n = np.arange(-8, 9)
    n1, n2 = np.meshgrid(n, n, indexing="ij")
    nn = (n1**2 + n2**2).astype(float)
    nz = nn > 0
    r = L * np.sqrt(nn[nz])
    real_sum = np.sum(gammaincc(a, alpha * r**2) / r**gamma)
    xi = (2.0 * np.pi / L) * np.sqrt(nn[nz])
    lam_hat = (np.pi / gamma_fn(a)) * (xi / 2.0) ** (gamma - 2.0) * gamma_fn(1.0 - a) * gammaincc(
        1.0 - a, xi**2 / (4.0 * alpha)
    )
    recip_sum = np.sum(lam_hat) / L**2
    lam0 = alpha**a / gamma_fn(a + 1.0)
    s_hat0 = np.pi * alpha ** (a - 1.0) / ((1.0 - a) * gamma_fn(a))
    return float(-lam0 + real_sum - s_hat0 / L**2 + recip_sum)


@dataclass(frozen=True)
class PotentialParams:
    """gamma in (1, 2), coupling lambda, mass m (normalised to 1).

    ``zero_mode`` fixes the xi = 0 value of the Riesz symbol:

    * ``"zero"``: drop it (mean-zero potential, the default);
    * a float ``c``: add the constant ``c`` to the kernel, so the potential
      shifts by ``c * int g``;
    * ``"continuum"``: the float that cancels the torus offset
      (``-torus_riesz_offset``), making the potential match the R^2
      convolution near the data.
    """

    gamma: float
    coupling: float = 1.0
    mass: float = 1.0
    zero_mode: ZeroMode = "zero"

    def __post_init__(self):
        if not (1.0 < self.gamma < 2.0):
            raise ConfigurationError(f"gamma must lie in (1, 2), got {self.gamma}")
        if not np.isfinite(self.coupling):
            raise ConfigurationError("coupling must be finite")
        if self.mass != 1.0:
            raise ConfigurationError("only the normalised mass m = 1 is supported")
        if isinstance(self.zero_mode, str):
            if self.zero_mode not in ("zero", "continuum"):
                raise ConfigurationError(f"unknown zero-mode policy {self.zero_mode!r}")
        elif not np.isfinite(self.zero_mode):
            raise ConfigurationError("zero-mode value must be finite")

    @property
    def riesz_constant(self) -> float:
        return riesz_constant(self.gamma)

    def kernel_offset(self, grid: Grid) -> float:
        if self.zero_mode == "zero":
            return 0.0
        if self.zero_mode == "continuum":
            return -torus_riesz_offset(grid.extent, self.gamma)
        return float(self.zero_mode)


@lru_cache(maxsize=32)
def _riesz_symbol_cached(grid: Grid, gamma: float, offset: float) -> np.ndarray:
    k = grid.kabs
    sym = np.empty(grid.shape)
    nz = k > 0
    sym[nz] = riesz_constant(gamma) * k[nz] ** (gamma - 2.0)
    sym[~nz] = offset * grid.extent**2
    sym.setflags(write=False)
    return sym


def riesz_symbol(grid: Grid, p: PotentialParams) -> np.ndarray:
    """Lattice samples of c |xi|^{gamma-2}; the xi=0 entry follows p.zero_mode."""
    return _riesz_symbol_cached(grid, float(p.gamma), float(p.kernel_offset(grid)))


def riesz_convolve(g: Field, p: PotentialParams) -> Field:
    """|x|^{-gamma} * g on the torus; returned in physical space."""
    if not np.all(np.isfinite(g.values)):
        raise NumericError("riesz_convolve: input has non-finite values")
    out = apply_multiplier(g.spectral(), riesz_symbol(g.grid, p))
    return to_physical(out)


def hartree_term(u: Field, v: Field, w: Field, p: PotentialParams) -> Field:
    """N_gamma(u, v, w) = (|x|^{-gamma} * (u conj(v))) w, without lambda."""
    for f in (v, w):
        if f.grid != u.grid:
            raise UsageError("hartree_term: fields live on different grids")
    for f in (u, v, w):
        if f.space != PHYSICAL:
            raise UsageError("hartree_term expects physical-space fields")
    rho = Field(u.grid, u.values * np.conj(v.values), PHYSICAL)
    return Field(u.grid, riesz_convolve(rho, p).values * w.values, PHYSICAL)


def hls_constant(gamma: float) -> float:
    """2 pi/(2-gamma) + 1: the explicit constant from the split at R = |u|_2/|u|_inf."""
    return 2.0 * np.pi / (2.0 - gamma) + 1.0


__all__ = [
    "PotentialParams",
    "bessel_power",
    "half_wave",
    "riesz_constant",
    "riesz_symbol",
    "riesz_convolve",
    "torus_riesz_offset",
    "hartree_term",
    "hls_constant",
    "lp_project",
    "lp_project_inhom",
    "chi",
    "chi_dyadic",
    "rho_inhom",
    "bump_radial",
    "dyadic_scales",
    "resolvable_band",
    "SPECTRAL",
]
