"""Flat dotted-key configuration files.

A config is TOML restricted to dotted keys with scalar or list values::

    grid.n = 256
    grid.extent = 64.0
    potential.gamma = 1.5

Nested tables are flattened back to dotted keys, and any key outside
``SCHEMA`` is rejected.  Sweep manifests add ``sweep.<key> = [values]``
axes over ordinary keys plus ``sweep.command``.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any, Mapping

import tomli

from .dynamics import InitialData, SimConfig
from .errors import ConfigurationError
from .operators import PotentialParams

_NUM = (int, float)

# key -> (accepted types, default)
SCHEMA: dict[str, tuple[tuple[type, ...], Any]] = {
    "grid.n": ((int,), 256),
    "grid.extent": (_NUM, 64.0),
    "potential.gamma": (_NUM, 1.5),
    "potential.coupling": (_NUM, 1.0),
    "potential.mass": (_NUM, 1.0),
    "potential.zero_mode": ((str, int, float), "zero"),
    "initial.kind": ((str,), "gaussian"),
    "initial.amplitude": (_NUM, 0.05),
    "initial.width": (_NUM, 1.0),
    "initial.carrier": ((list,), [0.0, 0.0]),
    "initial.radius": (_NUM, None),
    "initial.path": ((str,), None),
    "time.dt": (_NUM, 0.05),
    "time.t_end": (_NUM, 10.0),
    "time.sample_every": ((int,), 1),
    "solver.integrator": ((str,), "strang"),
    "solver.dealias": ((str,), "none"),
    "solver.enforce_horizon": ((bool,), True),
    "probes.channels": ((list,), ["mass", "energy", "sup"]),
    "fit.channels": ((list,), []),
    "fit.t_min": (_NUM, 10.0),
    "fit.t_max": (_NUM, None),
    "linear.scales": ((list,), [0.25, 0.5, 1.0]),
    "linear.gammas": ((list,), [1.2, 1.5, 1.8]),
    "scattering.cauchy_t_min": (_NUM, 5.0),
    "verify.samples": ((int,), 100_000),
    "verify.hls_fields": ((int,), 100_000),
    "verify.gamma": (_NUM, 1.5),
    "verify.stability": ((bool,), True),
    "verify.dispersive": ((bool,), True),
    "verify.dispersive_n": ((int,), 1024),
    "verify.dispersive_extent": (_NUM, 192.0),
    "verify.dispersive_width": (_NUM, 0.5),
    "verify.dispersive_t_max": ((int,), 64),
    "verify.cm": ((bool,), True),
    "verify.cm_points": ((int,), 40),
    "verify.cm_scale": (_NUM, 0.125),
    "sweep.command": ((str,), "simulate"),
}

SWEEP_PREFIX = "sweep."


def _flatten(d: Mapping, prefix: str = "") -> dict[str, Any]:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def _check_value(key: str, value: Any) -> None:
    types, _ = SCHEMA[key]
    if isinstance(value, bool) and bool not in types:
        raise ConfigurationError(f"{key}: expected {'/'.join(t.__name__ for t in types)}, got a boolean")
    if not isinstance(value, types):
        raise ConfigurationError(f"{key}: expected {'/'.join(t.__name__ for t in types)}, got {value!r}")


def validate(flat: Mapping[str, Any], allow_sweep: bool = False) -> dict[str, Any]:
    out = {}
    for key, value in flat.items():
        if key.startswith(SWEEP_PREFIX) and key != "sweep.command":
            if not allow_sweep:
                raise ConfigurationError(f"sweep axis {key!r} is only allowed in a sweep manifest")
            target = key[len(SWEEP_PREFIX) :]
            if target not in SCHEMA or target.startswith(SWEEP_PREFIX):
                raise ConfigurationError(f"unknown sweep axis {target!r}")
            if not isinstance(value, list) or not value:
                raise ConfigurationError(f"sweep axis {target!r} needs a non-empty list")
            for v in value:
                _check_value(target, v)
        elif key not in SCHEMA:
            raise ConfigurationError(f"unknown config key {key!r}")
        else:
            _check_value(key, value)
        out[key] = value
    return out


def parse_config(text: str, allow_sweep: bool = False) -> dict[str, Any]:
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigurationError(f"config parse error: {exc}") from None
    return validate(_flatten(data), allow_sweep)


def load_config(path: str | Path, allow_sweep: bool = False) -> dict[str, Any]:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {p}: {exc}") from None
    return parse_config(text, allow_sweep)


def resolved(flat: Mapping[str, Any], overrides: Mapping[str, Any] | None = None) -> dict[str, Any]:
    """Defaults, then ``overrides`` (command presets), then the file's keys."""
    out = {k: v for k, (_, v) in SCHEMA.items() if not k.startswith(SWEEP_PREFIX)}
    out.update(overrides or {})
    out.update({k: v for k, v in flat.items() if not k.startswith(SWEEP_PREFIX)})
    return out


def build_sim_config(cfg: Mapping[str, Any]) -> SimConfig:
    zm = cfg["potential.zero_mode"]
    pot = PotentialParams(
        gamma=float(cfg["potential.gamma"]),
        coupling=float(cfg["potential.coupling"]),
        mass=float(cfg["potential.mass"]),
        zero_mode=zm if isinstance(zm, str) else float(zm),
    )
    carrier = cfg["initial.carrier"]
    if len(carrier) != 2:
        raise ConfigurationError("initial.carrier must have two components")
    init = InitialData(
        kind=cfg["initial.kind"],
        amplitude=float(cfg["initial.amplitude"]),
        width=float(cfg["initial.width"]),
        carrier=tuple(float(c) for c in carrier),
        radius=None if cfg["initial.radius"] is None else float(cfg["initial.radius"]),
        path=cfg["initial.path"],
    )
    return SimConfig(
        n=int(cfg["grid.n"]),
        extent=float(cfg["grid.extent"]),
        potential=pot,
        initial=init,
        dt=float(cfg["time.dt"]),
        t_end=float(cfg["time.t_end"]),
        sample_every=int(cfg["time.sample_every"]),
        integrator=cfg["solver.integrator"],
        dealias=cfg["solver.dealias"],
        enforce_horizon=bool(cfg["solver.enforce_horizon"]),
    )


def canonical(cfg: Mapping[str, Any]) -> str:
    return json.dumps(dict(sorted(cfg.items())), sort_keys=True, separators=(",", ":"))


def config_hash(command: str, cfg: Mapping[str, Any], seed: int) -> str:
    h = hashlib.sha256()
    h.update(f"{command}\n{seed}\n".encode())
    h.update(canonical(cfg).encode())
    return h.hexdigest()[:16]


def dump_config(cfg: Mapping[str, Any]) -> str:
    """Serialise a flat config back to dotted-key TOML (round-trips through parse_config)."""
    lines = []
    for k in sorted(cfg):
        v = cfg[k]
        if v is None:
            continue
        lines.append(f"{k} = {_toml_value(v)}")
    return "\n".join(lines) + "\n"


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, list):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise ConfigurationError(f"cannot serialise {v!r}")
