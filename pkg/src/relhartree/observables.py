"""Norms, conserved quantities, LP-localised quadratic norms, scattering
channels and log-log decay fits."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import stats

from .errors import FitError, UsageError
from .operators import (
    PotentialParams,
    bessel_power,
    chi_dyadic,
    hartree_term,
    lp_project,
    lp_project_inhom,
    riesz_convolve,
    rho_inhom,
    _check_scale,
)
from .spectral import PHYSICAL, SPECTRAL, Field, Grid, l2_norm


# --------------------------------------------------------------------------
# containers


@dataclass
class TimeSeries:
    times: np.ndarray
    channels: dict[str, np.ndarray]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.times.ndim != 1:
            raise UsageError("times must be one-dimensional")
        if self.times.size > 1 and np.any(np.diff(self.times) <= 0):
            raise UsageError("times must be strictly increasing")
        chans = {}
        for name, vals in self.channels.items():
            vals = np.asarray(vals, dtype=float)
            if vals.shape != self.times.shape:
                raise UsageError(f"channel {name!r} has {vals.size} samples, expected {self.times.size}")
            chans[name] = vals
        self.channels = chans

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self.channels[name]
        except KeyError:
            raise UsageError(f"no channel {name!r}; have {sorted(self.channels)}") from None

    def __len__(self) -> int:
        return self.times.size

    def with_channels(self, extra: Mapping[str, Sequence[float]]) -> "TimeSeries":
        chans = dict(self.channels)
        chans.update(extra)
        return TimeSeries(self.times, chans, dict(self.metadata))


@dataclass(frozen=True)
class DecayFit:
    exponent: float
    log_amplitude: float
    r_squared: float
    window: tuple[float, float]
    n_samples: int

    def to_dict(self) -> dict:
        return {
            "exponent": self.exponent,
            "log_amplitude": self.log_amplitude,
            "r_squared": self.r_squared,
            "window": list(self.window),
            "n_samples": self.n_samples,
        }


# --------------------------------------------------------------------------
# norms


def mass(u: Field) -> float:
    """M(u) = ||u||_{L^2}."""
    return l2_norm(u)


def sup_norm(u: Field) -> float:
    return float(np.max(np.abs(u.physical().values)))


def sobolev_norm(u: Field, s: float) -> float:
    """||<xi>^s u_hat||_2 / (2 pi)."""
    g = u.grid
    spec = u.spectral().values
    return float(np.sqrt(np.sum(g.bracket ** (2 * s) * np.abs(spec) ** 2)) / g.extent)


def wkinf_norm(u: Field, k: int) -> float:
    """W^{k,inf} proxy ||<D>^k u||_inf."""
    if k == 0:
        return sup_norm(u)
    return sup_norm(bessel_power(u, k))


def l1_norm(u: Field) -> float:
    g = u.grid
    return float(np.sum(np.abs(u.physical().values)) * g.dx**2)


def potential_energy_density(u: Field, p: PotentialParams) -> Field:
    v = riesz_convolve(u.physical().abs2(), p)
    return Field(u.grid, v.values.real, PHYSICAL)


def energy(u: Field, p: PotentialParams) -> float:
    """Conserved energy 1/2 int conj(u) <D> u - (lambda/4) int (|x|^-g * |u|^2) |u|^2.

    The minus sign is the one for which the flow
    -i u_t + <D> u = lambda (|x|^-g * |u|^2) u is Hamiltonian.
    """
    g = u.grid
    spec = u.spectral().values
    kinetic = 0.5 * float(np.sum(g.bracket * np.abs(spec) ** 2)) / g.extent**2
    if p.coupling == 0:
        return kinetic
    phys = u.physical()
    dens = np.abs(phys.values) ** 2
    v = riesz_convolve(Field(g, dens, PHYSICAL), p).values.real
    potential = float(np.sum(v * dens)) * g.dx**2
    return kinetic - 0.25 * p.coupling * potential


def nonlinear_term_l2(u: Field, p: PotentialParams) -> float:
    """||(|x|^-g * |u|^2) u||_2 (lambda excluded)."""
    u = u.physical()
    return l2_norm(hartree_term(u, u, u, p))


def _boundary_fraction(f: Field) -> float:
    g = f.grid
    dens = np.abs(f.physical().values) ** 2
    total = dens.sum()
    if total == 0:
        return 0.0
    return float(dens[g.r2 > (g.extent / 4.0) ** 2].sum() / total)


def weighted_profile_norm(f: Field, weight_power: int, s: float) -> float:
    """||<x>^p f||_{H^s} with x the centred torus coordinate."""
    if weight_power not in (1, 2):
        raise UsageError("weight_power must be 1 or 2")
    g = f.grid
    phys = f.physical()
    frac = _boundary_fraction(phys)
    if frac > 1e-6:
        warnings.warn(
            f"profile has mass fraction {frac:.2e} outside |x| <= extent/4; weighted norm is torus-contaminated",
            RuntimeWarning,
            stacklevel=2,
        )
    w = (1.0 + g.r2) ** (weight_power / 2.0)
    return sobolev_norm(Field(g, w * phys.values, PHYSICAL), s)


def lp_quadratic_norms(u: Field, scales: Iterable[float] = (), inhom: Iterable[int] = ()) -> dict:
    """LP-localised norms of the density |u|^2.

    Returns ``{("P", L): (||P_L |u|^2||_2, ||P_L |u|^2||_inf), ("S", N): ||S_N |u|^2||_inf}``.
    """
    g = u.grid
    dens = Field(g, np.abs(u.physical().values) ** 2, PHYSICAL)
    spec = dens.spectral().values
    k1, k2 = g.kk
    out = {}
    for L in scales:
        _check_scale(g, L)
        piece = spec * chi_dyadic(k1, k2, L)
        l2 = float(np.sqrt(np.sum(np.abs(piece) ** 2)) / g.extent)
        linf = float(np.max(np.abs(g.ifft(piece))))
        out[("P", float(L))] = (l2, linf)
    for N in inhom:
        _check_scale(g, N, inhom=True)
        piece = spec * rho_inhom(k1, k2, N)
        out[("S", int(N))] = float(np.max(np.abs(g.ifft(piece))))
    return out


# --------------------------------------------------------------------------
# scattering


def _hs_of_spec(g: Grid, spec: np.ndarray, s: float) -> float:
    return float(np.sqrt(np.sum(g.bracket ** (2 * s) * np.abs(spec) ** 2)) / g.extent)


def profile_difference_norms(diff: Field, s: float, weighted_s: float | None) -> tuple[float, float]:
    h = sobolev_norm(diff, s)
    if weighted_s is None:
        return h, float("nan")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return h, weighted_profile_norm(diff, 2, weighted_s)


def scattering_diagnostics(
    profiles: Mapping[float, Field],
    t_end: float,
    s: float = 1.0,
    weighted_s: float = 5.0,
) -> dict[str, dict[float, float]]:
    """Distance of the profile from its final value, the v_+ surrogate.

    ``profiles`` maps sample time to the interaction profile f(t); it must
    contain ``t_end``.  Channels are only produced for t <= t_end/2:
    ``tail_h{s}`` = ||f(t) - f(t_end)||_{H^s} and ``tail_w2h{weighted_s}`` =
    ||<x>^2 (f(t) - f(t_end))||_{H^weighted_s}.
    """
    key_end = min(profiles, key=lambda t: abs(t - t_end))
    if abs(key_end - t_end) > 1e-9 * max(1.0, t_end):
        raise UsageError("profiles must include the final time")
    final = profiles[key_end]
    tail, tail_w = {}, {}
    for t in sorted(profiles):
        if t > t_end / 2.0 + 1e-12:
            continue
        diff = profiles[t].spectral() - final.spectral()
        h, w = profile_difference_norms(diff, s, weighted_s)
        tail[t] = h
        tail_w[t] = w
    return {f"tail_h{_fmt(s)}": tail, f"tail_w2h{_fmt(weighted_s)}": tail_w}


def _fmt(x: float) -> str:
    return f"{x:g}"


# --------------------------------------------------------------------------
# decay fits


def fit_decay(ts: TimeSeries, channel: str, window: tuple[float, float]) -> DecayFit:
    """Least-squares line through (log t, log y) for t in the closed ``window``."""
    t_min, t_max = float(window[0]), float(window[1])
    times = ts.times
    vals = ts[channel]
    eps = 1e-9 * max(1.0, abs(t_max))
    sel = (times >= t_min - eps) & (times <= t_max + eps)
    t, y = times[sel], vals[sel]
    if t.size < 8:
        raise FitError(f"fit of {channel!r} on [{t_min:g}, {t_max:g}] needs >= 8 samples, got {t.size}")
    bad = ~(y > 0)
    if bad.any():
        i = int(np.argmax(bad))
        raise FitError(f"fit of {channel!r}: non-positive value {y[i]!r} at t={t[i]:g}")
    return fit_power_law(t, y, (t_min, t_max))


def fit_power_law(t, y, window=None) -> DecayFit:
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.size < 8:
        raise FitError(f"power-law fit needs >= 8 samples, got {t.size}")
    if np.any(t <= 0) or np.any(~(y > 0)):
        raise FitError("power-law fit needs positive times and values")
    res = stats.linregress(np.log(t), np.log(y))
    r2 = float(min(1.0, max(0.0, res.rvalue**2))) if np.isfinite(res.rvalue) else 1.0
    if window is None:
        window = (float(t[0]), float(t[-1]))
    return DecayFit(float(res.slope), float(res.intercept), r2, tuple(window), int(t.size))


def is_decreasing(values: Sequence[float], rtol: float = 0.0) -> bool:
    v = np.asarray(values, dtype=float)
    return bool(np.all(v[1:] < v[:-1] * (1.0 + rtol)))
