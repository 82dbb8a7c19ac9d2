"""Time integration of  -i u_t + <D> u = lambda (|x|^-gamma * |u|^2) u.

Evolution form: u_t = -i<D>u + i lambda V u, V = |x|^-gamma * |u|^2.
Two integrators are provided: Strang splitting (production; unitary, so
mass is conserved to roundoff) and classical RK4 on the interaction
profile f = e^{it<D>} u (cross-check).

Internally everything runs on plain ``scipy.fft`` coefficients: every
operator here is a Fourier multiplier, so the dx^2 and (-1)^k factors of
the continuum convention cancel.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.fft as sfft

from . import observables as obs
from .errors import BlowUpError, ConfigurationError, UsageError
from .operators import PotentialParams, riesz_symbol, hartree_term
from .spectral import PHYSICAL, Field, Grid, make_grid

BLOWUP_FACTOR = 1e6
MASS_RADIUS_FRACTION = 0.9999
INTEGRATORS = ("strang", "rk4_interaction")
DEALIAS = ("none", "two_thirds")


@dataclass(frozen=True)
class InitialData:
    """u0 = amplitude * exp(-|x|^2 / (2 width^2)) [* e^{i carrier.x}], or a .npy file."""

    kind: str = "gaussian"
    amplitude: float = 0.05
    width: float = 1.0
    carrier: tuple[float, float] = (0.0, 0.0)
    radius: float | None = None
    path: str | None = None

    def __post_init__(self):
        if self.kind not in ("gaussian", "modulated_gaussian", "custom"):
            raise ConfigurationError(f"unknown initial data kind {self.kind!r}")
        if not (self.amplitude > 0):
            raise ConfigurationError("initial amplitude must be > 0")
        if self.kind == "custom":
            if self.path is None:
                raise ConfigurationError("custom initial data needs a path")
            if self.radius is None:
                raise ConfigurationError("custom initial data needs a declared radius")
        else:
            if not (self.width > 0):
                raise ConfigurationError("gaussian width must be > 0")
            # |u0|^2 ~ exp(-r^2/w^2): fraction inside R is 1 - exp(-R^2/w^2)
            need = self.width * math.sqrt(-math.log(1.0 - MASS_RADIUS_FRACTION))
            if self.radius is not None and self.radius < need:
                raise ConfigurationError(
                    f"declared radius {self.radius} holds less than 99.99% of the mass (need >= {need:.4g})"
                )
        object.__setattr__(self, "carrier", tuple(float(c) for c in self.carrier))

    @property
    def declared_radius(self) -> float:
        if self.radius is not None:
            return float(self.radius)
        return 4.0 * self.width

    def build(self, grid: Grid) -> Field:
        if self.kind == "custom":
            vals = np.load(Path(self.path))
            if vals.shape != grid.shape:
                raise ConfigurationError(f"custom data has shape {vals.shape}, grid is {grid.shape}")
            return Field(grid, self.amplitude * vals, PHYSICAL)
        x1, x2 = grid.xx
        u = self.amplitude * np.exp(-(x1**2 + x2**2) / (2.0 * self.width**2))
        if self.kind == "modulated_gaussian":
            u = u * np.exp(1j * (self.carrier[0] * x1 + self.carrier[1] * x2))
        return Field(grid, u, PHYSICAL)


@dataclass(frozen=True)
class SimConfig:
    n: int
    extent: float
    potential: PotentialParams
    initial: InitialData
    dt: float
    t_end: float
    sample_every: int = 1
    integrator: str = "strang"
    dealias: str = "none"
    enforce_horizon: bool = True

    def __post_init__(self):
        make_grid(self.n, self.extent)
        if not (self.dt > 0):
            raise ConfigurationError("dt must be > 0")
        if self.dt > 0.5:
            raise ConfigurationError(f"dt = {self.dt} exceeds the accuracy guard 0.5")
        if not (self.t_end > 0):
            raise ConfigurationError("t_end must be > 0")
        if int(self.sample_every) < 1:
            raise ConfigurationError("sample_every must be >= 1")
        if self.integrator not in INTEGRATORS:
            raise ConfigurationError(f"integrator must be one of {INTEGRATORS}")
        if self.dealias not in DEALIAS:
            raise ConfigurationError(f"dealias must be one of {DEALIAS}")
        steps = self.t_end / self.dt
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
            raise ConfigurationError(f"t_end = {self.t_end} is not a multiple of dt = {self.dt}")
        if self.enforce_horizon and self.t_end > self.t_safe + 1e-12:
            raise ConfigurationError(
                f"t_end = {self.t_end} exceeds the wrap-around horizon T_safe = {self.t_safe:.6g} "
                f"(extent/2 - R0 - extent/8)"
            )

    @property
    def grid(self) -> Grid:
        return make_grid(self.n, self.extent)

    @property
    def margin(self) -> float:
        return self.extent / 8.0

    @property
    def t_safe(self) -> float:
        return safe_horizon(self.extent, self.initial.declared_radius)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    def with_(self, **kw) -> "SimConfig":
        return replace(self, **kw)


def safe_horizon(extent: float, radius: float) -> float:
    """Largest time before outgoing waves (group speed < 1) can wrap around."""
    return extent / 2.0 - radius - extent / 8.0


@dataclass(frozen=True)
class SimState:
    t: float
    u: Field
    step_count: int = 0

    @classmethod
    def initial(cls, cfg: SimConfig) -> "SimState":
        return cls(0.0, cfg.initial.build(cfg.grid), 0)


# --------------------------------------------------------------------------
# array-level kernels


class _Kernel:
    """Precomputed multipliers for one (grid, potential, dt, dealias)."""

    def __init__(self, grid: Grid, p: PotentialParams, dt: float, dealias: str = "none"):
        self.grid = grid
        self.p = p
        self.dt = dt
        n = grid.n
        self.bracket = grid.bracket
        self.half_lin = np.exp(-0.5j * dt * grid.bracket)
        sym = riesz_symbol(grid, p)
        self.rsym = np.ascontiguousarray(sym[:, : n // 2 + 1])
        if dealias == "two_thirds":
            k = np.abs(np.fft.fftfreq(n, d=1.0 / n))
            keep = k < n / 3.0
            mask = np.multiply.outer(keep, keep).astype(float)
            self.mask = mask
            self.rsym = self.rsym * mask[:, : n // 2 + 1]
        else:
            self.mask = None

    def potential(self, dens: np.ndarray) -> np.ndarray:
        n = self.grid.n
        return sfft.irfft2(self.rsym * sfft.rfft2(dens), s=(n, n))

    def nonlinear(self, u: np.ndarray) -> np.ndarray:
        return self.potential(np.abs(u) ** 2) * u

    def strang(self, u: np.ndarray, lam: float) -> np.ndarray:
        uh = sfft.fft2(u) * self.half_lin
        if self.mask is not None:
            uh *= self.mask
        u = sfft.ifft2(uh)
        if lam != 0:
            u = u * np.exp(1j * lam * self.dt * self.potential(np.abs(u) ** 2))
        uh = sfft.fft2(u) * self.half_lin
        if self.mask is not None:
            uh *= self.mask
        return sfft.ifft2(uh)

    def rk4(self, u: np.ndarray, t: float, lam: float) -> np.ndarray:
        dt = self.dt
        b = self.bracket
        fh = sfft.fft2(u) * np.exp(1j * t * b)
        if lam == 0:
            return sfft.ifft2(fh * np.exp(-1j * (t + dt) * b))

        def rhs(s, fh_):
            ph = np.exp(1j * s * b)
            uu = sfft.ifft2(fh_ / ph)
            return 1j * lam * ph * sfft.fft2(self.nonlinear(uu))

        k1 = rhs(t, fh)
        k2 = rhs(t + dt / 2, fh + dt / 2 * k1)
        k3 = rhs(t + dt / 2, fh + dt / 2 * k2)
        k4 = rhs(t + dt, fh + dt * k3)
        fh = fh + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        return sfft.ifft2(fh * np.exp(-1j * (t + dt) * b))


def _kernel_for(cfg: SimConfig) -> _Kernel:
    return _Kernel(cfg.grid, cfg.potential, cfg.dt, cfg.dealias)


def _check_state(state: SimState, cfg: SimConfig) -> None:
    if state.u.grid != cfg.grid:
        raise UsageError("state lives on a different grid than the config")


def _guard(u: np.ndarray, t: float, sup0: float, history: list[float]) -> None:
    sup = float(np.max(np.abs(u)))
    history.append(sup)
    if not np.isfinite(sup) or sup > BLOWUP_FACTOR * sup0:
        raise BlowUpError(f"blow-up at t = {t:g}: sup|u| = {sup:g} (initial {sup0:g})", t=t, sup_history=history)


def strang_step(state: SimState, cfg: SimConfig, kernel: _Kernel | None = None) -> SimState:
    """e^{-i dt/2 <D>} . exp(i lambda dt V) . e^{-i dt/2 <D>}; the middle factor is exact
    because |u| does not change during the potential substep."""
    _check_state(state, cfg)
    k = kernel or _kernel_for(cfg)
    u0 = state.u.physical().values
    u = k.strang(u0, cfg.potential.coupling)
    t = state.t + cfg.dt
    _guard(u, t, float(np.max(np.abs(u0))), [])
    return SimState(t, Field(cfg.grid, u, PHYSICAL), state.step_count + 1)


def rk4_interaction_step(state: SimState, cfg: SimConfig, kernel: _Kernel | None = None) -> SimState:
    """Classical RK4 for f' = i lambda e^{it<D>} N(u,u,u), u = e^{-it<D>} f."""
    _check_state(state, cfg)
    k = kernel or _kernel_for(cfg)
    u0 = state.u.physical().values
    u = k.rk4(u0, state.t, cfg.potential.coupling)
    t = state.t + cfg.dt
    _guard(u, t, float(np.max(np.abs(u0))), [])
    return SimState(t, Field(cfg.grid, u, PHYSICAL), state.step_count + 1)


def interaction_profile(state: SimState) -> Field:
    """f(t) = e^{it<D>} u(t)."""
    from .operators import half_wave

    return half_wave(state.u.physical(), state.t)


def evolve(cfg: SimConfig, state: SimState | None = None, n_steps: int | None = None) -> SimState:
    """Advance ``n_steps`` (default: to t_end) without sampling."""
    state = state or SimState.initial(cfg)
    k = _kernel_for(cfg)
    lam = cfg.potential.coupling
    u = state.u.physical().values
    sup0 = float(np.max(np.abs(u)))
    t = state.t
    steps = cfg.n_steps if n_steps is None else n_steps
    hist: list[float] = []
    for i in range(steps):
        u = k.strang(u, lam) if cfg.integrator == "strang" else k.rk4(u, t, lam)
        t = state.t + (i + 1) * cfg.dt
        _guard(u, t, sup0, hist)
    return SimState(t, Field(cfg.grid, u, PHYSICAL), state.step_count + steps)


# --------------------------------------------------------------------------
# probes


def _num(s: str) -> float:
    try:
        return float(s)
    except ValueError:
        raise ConfigurationError(f"probe argument {s!r} is not a number") from None


def _probe(name: str, cfg: SimConfig):
    """Return a callable (u_field, t) -> float for a probe name, or None for
    profile-pair channels, which run() fills separately."""
    p = cfg.potential
    head, _, arg = name.partition(":")
    if head == "mass" and not arg:
        return lambda u, t: obs.mass(u)
    if head == "energy" and not arg:
        return lambda u, t: obs.energy(u, p)
    if head == "sup" and not arg:
        return lambda u, t: obs.sup_norm(u)
    if head == "wkinf":
        k = int(arg)
        return lambda u, t: obs.wkinf_norm(u, k)
    if head == "sobolev":
        s = _num(arg)
        return lambda u, t: obs.sobolev_norm(u, s)
    if head == "nonlinear_l2":
        # optional argument selects gamma, e.g. nonlinear_l2:1.2 on a linear run
        q = replace(p, gamma=_num(arg)) if arg else p
        return lambda u, t: obs.nonlinear_term_l2(u, q)
    if head in ("lp_l2", "lp_linf"):
        L = _num(arg)
        idx = 0 if head == "lp_l2" else 1
        obs._check_scale(cfg.grid, L)
        return lambda u, t: obs.lp_quadratic_norms(u, [L])[("P", L)][idx]
    if head == "sn_linf":
        N = int(arg)
        obs._check_scale(cfg.grid, N, inhom=True)
        return lambda u, t: obs.lp_quadratic_norms(u, [], [N])[("S", N)]
    if head == "profile_h":
        s = _num(arg)
        from .operators import half_wave

        return lambda u, t: obs.sobolev_norm(half_wave(u, t), s)
    if head in ("cauchy_h", "cauchy_w2h", "tail_h", "tail_w2h"):
        _num(arg)
        return None
    raise ConfigurationError(f"unknown probe {name!r}")


def run(cfg: SimConfig, probes: Sequence[str] = ("mass", "energy", "sup")) -> obs.TimeSeries:
    """Integrate to t_end sampling ``probes`` every ``sample_every`` steps.

    Profile-pair probes: ``cauchy_h{s}`` = ||f(2t) - f(t)||_{H^s},
    ``cauchy_w2h{s}`` = ||<x>^2 (f(2t) - f(t))||_{H^s}, and ``tail_h{s}``,
    ``tail_w2h{s}`` against f(t_end).  They are reported at the earlier time
    t and are NaN for t > t_end/2.
    """
    grid = cfg.grid
    k = _kernel_for(cfg)
    lam = cfg.potential.coupling
    probes = list(probes)
    funcs = {name: _probe(name, cfg) for name in probes}
    pair = {name: float(name.partition(":")[2]) for name, f in funcs.items() if f is None}
    keep_profiles = bool(pair)
    if keep_profiles and cfg.n_steps % int(cfg.sample_every) != 0:
        raise ConfigurationError("profile-pair probes need n_steps to be a multiple of sample_every")
    state = SimState.initial(cfg)
    u = state.u.values
    sup0 = float(np.max(np.abs(u)))
    bracket = grid.bracket

    times: list[float] = []
    values: dict[str, list[float]] = {name: [] for name in probes}
    profiles: dict[int, np.ndarray] = {}  # sample index -> plain fft of f
    hist: list[float] = []

    def profile_spec(uarr, t):
        return sfft.fft2(uarr) * np.exp(1j * t * bracket)

    def pair_value(name, fa, fb):
        head, s = name.partition(":")[0], pair[name]
        diff = Field(grid, sfft.ifft2(fa - fb), PHYSICAL)
        if head.endswith("w2h"):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                return obs.weighted_profile_norm(diff, 2, s)
        return obs.sobolev_norm(diff, s)

    def sample(idx, t, uarr):
        times.append(t)
        uf = Field(grid, uarr, PHYSICAL)
        for name, f in funcs.items():
            values[name].append(f(uf, t) if f is not None else np.nan)
        if keep_profiles:
            fh = profile_spec(uarr, t)
            if t <= cfg.t_end / 2.0 + 1e-12:
                profiles[idx] = fh
            if idx % 2 == 0 and idx // 2 in profiles:
                j = idx // 2
                for name in pair:
                    if name.startswith("cauchy"):
                        values[name][j] = pair_value(name, fh, profiles[j])
            return fh
        return None

    def partial_series():
        n = len(times)
        return obs.TimeSeries(times, {nm: v[:n] for nm, v in values.items()}, {"config": cfg})

    sample(0, 0.0, u)
    fh_end = None
    n_steps = cfg.n_steps
    every = int(cfg.sample_every)
    t = 0.0
    try:
        for i in range(1, n_steps + 1):
            u = k.strang(u, lam) if cfg.integrator == "strang" else k.rk4(u, t, lam)
            t = i * cfg.dt
            _guard(u, t, sup0, hist)
            if i % every == 0 or i == n_steps:
                fh_end = sample(len(times), t, u)
    except BlowUpError as exc:
        exc.partial = partial_series()
        raise

    if keep_profiles and fh_end is not None:
        for name in pair:
            if name.startswith("tail"):
                for j, fh in profiles.items():
                    values[name][j] = pair_value(name, fh, fh_end)
    ts = obs.TimeSeries(times, values, {"config": cfg})
    ts.final_state = SimState(t, Field(grid, u, PHYSICAL), n_steps)
    return ts


def gauge_invariance_check(cfg: SimConfig, value: float | None = None) -> dict:
    """Run with zero_mode 'zero' and with a constant kernel offset; compare |u|.

    The offset only adds lambda * c * M^2 to the potential, i.e. a global
    phase, so moduli and all norms must agree.
    """
    p0 = replace(cfg.potential, zero_mode="zero")
    c = float(value) if value is not None else cfg.potential.riesz_constant
    p1 = replace(cfg.potential, zero_mode=c)
    s0 = evolve(replace(cfg, potential=p0))
    s1 = evolve(replace(cfg, potential=p1))
    a0 = np.abs(s0.u.values)
    a1 = np.abs(s1.u.values)
    diff = float(np.max(np.abs(a0 - a1)))
    norms = {}
    for name, fn in (
        ("mass", obs.mass),
        ("sup", obs.sup_norm),
        ("h1", lambda f: obs.sobolev_norm(f, 1.0)),
    ):
        x0, x1 = fn(s0.u), fn(s1.u)
        norms[name] = (x0, x1, abs(x0 - x1) / max(abs(x0), 1e-300))
    passed = diff < 1e-8 and all(v[2] < 1e-8 for v in norms.values())
    return {"offset": c, "max_abs_modulus_diff": diff, "norms": norms, "passed": passed}
