"""Reference experiment configurations and the multi-run checks built on them.

The presets are flat config dicts (see ``config.SCHEMA``); commands layer a
user config on top of them.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Sequence

import numpy as np

from .dynamics import InitialData, SimConfig, SimState, evolve, gauge_invariance_check, run
from .operators import PotentialParams, half_wave, hartree_term

# lambda = 0 flow from a width-2 Gaussian; T_safe = 64 - 6.5 - 16 = 41.5
LINEAR_PRESET = {
    "grid.n": 256,
    "grid.extent": 128.0,
    "potential.coupling": 0.0,
    "potential.zero_mode": "continuum",
    "initial.amplitude": 1.0,
    "initial.width": 2.0,
    "initial.radius": 6.5,
    "time.dt": 0.5,
    "time.t_end": 41.0,
}

SCATTERING_PRESET = {
    "grid.n": 256,
    "grid.extent": 128.0,
    "potential.gamma": 1.5,
    "potential.coupling": 1.0,
    "potential.zero_mode": "continuum",
    "initial.amplitude": 0.01,
    "initial.width": 2.1,
    "initial.radius": 6.5,
    "time.dt": 0.1,
    "time.t_end": 41.0,
    "time.sample_every": 5,
}


def conservation_config(coupling: float, dt: float = 0.05, t_end: float = 50.0) -> SimConfig:
    """gamma = 1.5, eps = 0.05 Gaussian on n = 256, extent = 64.

    t_end = 50 lies beyond the wrap-around horizon; conservation laws hold on
    the torus regardless, so the horizon check is switched off.
    """
    return SimConfig(
        n=256,
        extent=64.0,
        potential=PotentialParams(1.5, coupling),
        initial=InitialData("gaussian", amplitude=0.05, width=1.0),
        dt=dt,
        t_end=t_end,
        enforce_horizon=False,
    )


def conservation_check(coupling: float, dt: float = 0.05, t_end: float = 50.0) -> dict:
    """Relative mass drift at dt, and the ratio of max energy drift at dt vs dt/2."""
    out = {}
    drifts = []
    for step in (dt, dt / 2.0):
        cfg = conservation_config(coupling, step, t_end)
        ts = run(cfg, ("mass", "energy"))
        m, e = ts["mass"], ts["energy"]
        if step == dt:
            out["mass_drift"] = float(np.max(np.abs(m - m[0])) / m[0])
        drifts.append(float(np.max(np.abs(e - e[0]))))
    out["energy_drift"] = drifts
    out["energy_ratio"] = drifts[0] / drifts[1]
    return out


def integrator_discrepancy(dts: Sequence[float], t: float = 1.0, amplitude: float = 0.05) -> dict:
    """max |u_strang - u_rk4| at time t for each dt, and successive halving ratios."""
    base = SimConfig(
        n=256,
        extent=64.0,
        potential=PotentialParams(1.5, 1.0),
        initial=InitialData("gaussian", amplitude=amplitude, width=1.0),
        dt=dts[0],
        t_end=t,
    )
    disc = []
    for dt in dts:
        a = evolve(replace(base, dt=dt, integrator="strang")).u.values
        b = evolve(replace(base, dt=dt, integrator="rk4_interaction")).u.values
        disc.append(float(np.max(np.abs(a - b))))
    ratios = [disc[i] / disc[i + 1] for i in range(len(disc) - 1)]
    return {"dt": list(dts), "discrepancy": disc, "ratios": ratios}


def gauge_check(t_end: float = 20.0, value: float | None = None) -> dict:
    cfg = conservation_config(1.0, 0.05, t_end)
    return gauge_invariance_check(cfg, value)


def first_order_duhamel_error(t: float = 1.0, amplitude: float = 0.02) -> float:
    """Relative error of u(t) ~ e^{-it<D>}u0 + i lam int_0^t e^{-i(t-s)<D>} V(s) u_lin(s) ds
    against the full solution, measured on u - u_lin (trapezoid in s)."""
    cfg = SimConfig(
        n=128,
        extent=32.0,
        potential=PotentialParams(1.5, 1.0),
        initial=InitialData("gaussian", amplitude=amplitude, width=1.0),
        dt=0.01,
        t_end=t,
    )
    u0 = SimState.initial(cfg).u
    full = evolve(cfg).u.values
    s_nodes = np.linspace(0.0, t, 41)
    vals = []
    for s in s_nodes:
        ul = half_wave(u0, -s)
        nl = hartree_term(ul, ul, ul, cfg.potential)
        vals.append(half_wave(nl, -(t - s)).values)
    integral = np.trapezoid(np.array(vals), s_nodes, axis=0)
    u_lin_t = half_wave(u0, -t).values
    approx = u_lin_t + 1j * cfg.potential.coupling * integral
    true_corr = full - u_lin_t
    est_corr = approx - u_lin_t
    return float(np.sqrt(np.sum(np.abs(true_corr - est_corr) ** 2)) / np.sqrt(np.sum(np.abs(true_corr) ** 2)))
