"""Experiment runner: commands, run records and their on-disk form.

A run directory ``<root>/<command>-<hash>`` holds

* ``config.toml``   resolved flat config,
* ``series.csv``    t then channels in declaration order (float repr),
* ``summary.json``  config echo, seed, fits, verdicts, extra tables,
* ``timing.json``   wall-clock timestamps (kept apart so the other files
  are bit-identical across reruns),
* ``plots/*.svg``   log-log plots of every fitted channel.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from . import analysis
from .config import (
    SWEEP_PREFIX,
    build_sim_config,
    config_hash,
    dump_config,
    load_config,
    resolved,
)
from .dynamics import run, safe_horizon
from .errors import ConfigurationError, UsageError
from .experiments import LINEAR_PRESET, SCATTERING_PRESET
from .observables import DecayFit, TimeSeries, fit_decay, fit_power_law, is_decreasing
from .spectral import Field, make_grid
from .svgplot import loglog_svg

COMMANDS = ("simulate", "linear-decay", "scattering", "verify")
DEFAULT_ROOT = "runs"


def output_root(explicit: str | None = None) -> Path:
    if explicit:
        return Path(explicit)
    return Path(os.environ.get("RELHARTREE_OUT", DEFAULT_ROOT))


# --------------------------------------------------------------------------
# records


@dataclass(frozen=True)
class Verdict:
    name: str
    passed: bool
    measured: dict
    target: str

    def __post_init__(self):
        object.__setattr__(self, "measured", analysis._jsonable(dict(self.measured)))
        object.__setattr__(self, "passed", bool(self.passed))

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "measured": self.measured, "target": self.target}

    @classmethod
    def from_dict(cls, d: Mapping) -> "Verdict":
        return cls(d["name"], bool(d["passed"]), dict(d["measured"]), d["target"])


@dataclass
class RunRecord:
    command: str
    config: dict
    seed: int
    series: TimeSeries | None = None
    fits: dict[str, DecayFit] = field(default_factory=dict)
    verdicts: list[Verdict] = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    timestamps: dict = field(default_factory=dict)
    directory: Path | None = None

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    @property
    def run_id(self) -> str:
        return f"{self.command}-{config_hash(self.command, self.config, self.seed)}"

    def check(self) -> None:
        if self.series is None:
            return
        for name in self.fits:
            if name not in self.series.channels:
                raise UsageError(f"fit refers to missing channel {name!r}")
        for v in self.verdicts:
            ch = v.measured.get("channel")
            if ch is not None and ch not in self.series.channels:
                raise UsageError(f"verdict {v.name!r} refers to missing channel {ch!r}")

    def summary(self) -> dict:
        return {
            "command": self.command,
            "seed": self.seed,
            "config": dict(sorted(self.config.items())),
            "channels": list(self.series.channels) if self.series is not None else [],
            "fits": {k: f.to_dict() for k, f in self.fits.items()},
            "verdicts": [v.to_dict() for v in self.verdicts],
            "extra": analysis._jsonable(self.extra),
            "passed": self.passed,
        }


def series_csv(ts: TimeSeries) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    names = list(ts.channels)
    w.writerow(["t"] + names)
    for i, t in enumerate(ts.times):
        w.writerow([repr(float(t))] + [repr(float(ts.channels[n][i])) for n in names])
    return buf.getvalue()


def read_series_csv(text: str) -> TimeSeries:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0][0] != "t":
        raise ConfigurationError("series CSV needs a header row starting with 't'")
    names = rows[0][1:]
    data = np.array([[float(x) for x in r] for r in rows[1:]], dtype=float).reshape(-1, len(names) + 1)
    return TimeSeries(data[:, 0], {n: data[:, j + 1] for j, n in enumerate(names)})


def _fit_from_dict(d: Mapping) -> DecayFit:
    return DecayFit(d["exponent"], d["log_amplitude"], d["r_squared"], tuple(d["window"]), d["n_samples"])


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def write_record(rec: RunRecord, directory: Path) -> Path:
    rec.check()
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "config.toml").write_text(dump_config(rec.config))
    if rec.series is not None:
        (directory / "series.csv").write_text(series_csv(rec.series))
    (directory / "summary.json").write_text(_json(rec.summary()))
    (directory / "timing.json").write_text(_json(rec.timestamps))
    if rec.series is not None and rec.fits:
        (directory / "plots").mkdir(exist_ok=True)
        for name, fit in rec.fits.items():
            svg = loglog_svg(
                rec.series.times, rec.series[name], name, (fit.exponent, fit.log_amplitude, *fit.window)
            )
            (directory / "plots" / f"{_safe(name)}.svg").write_text(svg)
    rec.directory = directory
    return directory


def _safe(name: str) -> str:
    return name.replace(":", "_").replace("/", "_")


def load_record(directory: str | Path) -> RunRecord:
    d = Path(directory)
    try:
        summ = json.loads((d / "summary.json").read_text())
    except OSError as exc:
        raise ConfigurationError(f"no run record at {d}: {exc}") from None
    series = None
    if (d / "series.csv").exists():
        series = read_series_csv((d / "series.csv").read_text())
        if list(series.channels) != summ["channels"]:
            raise ConfigurationError("series.csv channels disagree with summary.json")
    timing = json.loads((d / "timing.json").read_text()) if (d / "timing.json").exists() else {}
    return RunRecord(
        command=summ["command"],
        config=summ["config"],
        seed=summ["seed"],
        series=series,
        fits={k: _fit_from_dict(v) for k, v in summ["fits"].items()},
        verdicts=[Verdict.from_dict(v) for v in summ["verdicts"]],
        extra=summ["extra"],
        timestamps=timing,
        directory=d,
    )


# --------------------------------------------------------------------------
# commands


def _fmt(x: float) -> str:
    return f"{x:g}"


def _range_verdict(name: str, fit: DecayFit, lo: float, hi: float, channel: str) -> Verdict:
    ok = lo <= fit.exponent <= hi
    return Verdict(name, ok, {"channel": channel, "exponent": fit.exponent, "r_squared": fit.r_squared}, f"[{lo:g}, {hi:g}]")


def _fit_window(sim, cfg) -> tuple[float, float]:
    hi = cfg["fit.t_max"] if cfg["fit.t_max"] is not None else sim.t_safe
    return float(cfg["fit.t_min"]), float(min(hi, sim.t_end))


def cmd_simulate(cfg: Mapping[str, Any], seed: int) -> RunRecord:
    sim = build_sim_config(cfg)
    channels = [str(c) for c in cfg["probes.channels"]]
    ts = run(sim, channels)
    fits, verdicts = {}, []
    window = _fit_window(sim, cfg)
    for ch in cfg["fit.channels"]:
        if ch not in ts.channels:
            raise ConfigurationError(f"fit channel {ch!r} is not among probes.channels")
        fits[ch] = fit_decay(ts, ch, window)
    if "mass" in ts.channels and sim.integrator == "strang":
        m = ts["mass"]
        drift = float(np.max(np.abs(m - m[0])) / m[0])
        verdicts.append(Verdict("mass_conservation", drift < 1e-10, {"channel": "mass", "relative_drift": drift}, "< 1e-10"))
    if "energy" in ts.channels:
        e = ts["energy"]
        extra = {"energy_max_drift": float(np.max(np.abs(e - e[0])))}
    else:
        extra = {}
    extra["t_safe"] = sim.t_safe
    return RunRecord("simulate", dict(cfg), seed, ts, fits, verdicts, extra)


def cmd_linear_decay(cfg: Mapping[str, Any], seed: int) -> RunRecord:
    if float(cfg["potential.coupling"]) != 0.0:
        raise ConfigurationError("linear-decay runs the lambda = 0 flow; potential.coupling must be 0")
    sim = build_sim_config(cfg)
    gammas = [float(g) for g in cfg["linear.gammas"]]
    scales = [float(L) for L in cfg["linear.scales"]]
    channels = ["sup"] + [f"nonlinear_l2:{_fmt(g)}" for g in gammas] + [f"lp_l2:{_fmt(L)}" for L in scales]
    ts = run(sim, channels)
    window = _fit_window(sim, cfg)
    fits, verdicts = {}, []
    fits["sup"] = fit_decay(ts, "sup", window)
    verdicts.append(_range_verdict("dispersive_decay", fits["sup"], -1.1, -0.9, "sup"))
    for g in gammas:
        ch = f"nonlinear_l2:{_fmt(g)}"
        fits[ch] = fit_decay(ts, ch, window)
        verdicts.append(_range_verdict(f"nonlinear_decay_gamma_{_fmt(g)}", fits[ch], -g - 0.15, -g + 0.15, ch))
    for L in scales:
        ch = f"lp_l2:{_fmt(L)}"
        fits[ch] = fit_decay(ts, ch, window)
        verdicts.append(_range_verdict(f"space_resonance_L_{_fmt(L)}", fits[ch], -math.inf, -2.5, ch))
    return RunRecord("linear-decay", dict(cfg), seed, ts, fits, verdicts, {"t_safe": sim.t_safe})


def cmd_scattering(cfg: Mapping[str, Any], seed: int) -> RunRecord:
    sim = build_sim_config(cfg)
    gamma = sim.potential.gamma
    channels = ["mass", "energy", "sup", "wkinf:7", "cauchy_h:1", "cauchy_w2h:5"]
    ts = run(sim, channels)
    fits, verdicts = {}, []
    fits["wkinf:7"] = fit_decay(ts, "wkinf:7", _fit_window(sim, cfg))
    verdicts.append(_range_verdict("w7inf_decay", fits["wkinf:7"], -1.15, -0.85, "wkinf:7"))
    t0, t1 = float(cfg["scattering.cauchy_t_min"]), sim.t_end / 2.0
    sel = (ts.times >= t0 - 1e-9) & (ts.times <= t1 + 1e-9)
    tsel = ts.times[sel]
    for ch, bound, label in (
        ("cauchy_h:1", -(gamma - 1.0) + 0.15, "cauchy_h1"),
        ("cauchy_w2h:5", -(gamma - 1.0) / 3.0 + 0.1, "cauchy_w2h5"),
    ):
        y = ts[ch][sel]
        mono = is_decreasing(y)
        fit = fit_power_law(tsel, y, (t0, t1))
        fits[ch] = fit
        verdicts.append(Verdict(f"{label}_monotone", mono, {"channel": ch, "window": [t0, t1]}, "strictly decreasing"))
        verdicts.append(_range_verdict(f"{label}_rate", fit, -math.inf, bound, ch))
    m = ts["mass"]
    drift = float(np.max(np.abs(m - m[0])) / m[0])
    verdicts.append(Verdict("mass_conservation", drift < 1e-10, {"channel": "mass", "relative_drift": drift}, "< 1e-10"))
    return RunRecord("scattering", dict(cfg), seed, ts, fits, verdicts, {"t_safe": sim.t_safe, "gamma": gamma})


# verify sections; each returns (verdicts, extra)


def _stable(a: float, b: float, tol: float = 0.2) -> bool:
    return abs(b / a - 1.0) <= tol


def verify_inequalities(samples: int, seed: int, gamma: float, hls_fields: int, stability: bool):
    verdicts, extra = [], {}
    runs = [("null_structure", lambda n: analysis.verify_null_structure(n, seed))]
    runs.append(("m_derivatives", lambda n: analysis.verify_m_derivatives(2, n, seed)))
    for name, fn in runs:
        s = fn(samples)
        extra[name] = s.to_dict()
        verdicts.append(Verdict(f"{name}_violations", s.violations == 0, {"violations": s.violations, "n": s.n_samples}, "0"))
        if stability:
            s2 = fn(2 * samples)
            extra[name + "_doubled"] = s2.to_dict()
            if name == "null_structure":
                pairs = list(zip(s.empirical_constants, s2.empirical_constants))
            else:
                c1, c2 = s.details["constant_by_order"], s2.details["constant_by_order"]
                pairs = [(c1[k], c2[k]) for k in sorted(c1)]
            ok = all(_stable(a, b) for a, b in pairs)
            verdicts.append(Verdict(f"{name}_stability", ok, {"constants": pairs}, "within 20% under doubling n"))
    s = analysis.verify_hls(gamma, hls_fields, seed)
    extra["hls"] = s.to_dict()
    verdicts.append(Verdict("hls_violations", s.violations == 0, {"violations": s.violations, "worst_ratio": s.worst_ratio}, "0"))
    if stability:
        s2 = analysis.verify_hls(gamma, 2 * hls_fields, seed)
        extra["hls_doubled"] = s2.to_dict()
        ok = _stable(s.worst_ratio, s2.worst_ratio)
        verdicts.append(Verdict("hls_stability", ok, {"constants": [s.worst_ratio, s2.worst_ratio]}, "within 20% under doubling n"))
    return verdicts, extra


def dispersive_datum(n: int, extent: float, width: float) -> Field:
    grid = make_grid(n, extent)
    return Field.from_function(grid, lambda a, b: np.exp(-(a * a + b * b) / (2.0 * width * width)))


def verify_dispersive_section(n: int, extent: float, width: float, t_max: int):
    datum = dispersive_datum(n, extent, width)
    radius = width * math.sqrt(math.log(1e4))
    t_safe = safe_horizon(extent, radius)
    s = analysis.verify_dispersive([1, 2, 4, 8], range(1, t_max + 1), datum, t_safe=t_safe)
    ex = s.details["exponents"]
    verdicts = [Verdict("dispersive_sup_ratio_finite", bool(np.isfinite(s.worst_ratio)), {"sup_ratio": s.worst_ratio}, "finite")]
    for N, p in ex.items():
        verdicts.append(
            Verdict(f"dispersive_exponent_N{N}", -1.15 <= p <= -0.85, {"exponent": p, "fit_from": s.details["fit_from"]}, "[-1.15, -0.85]")
        )
    return verdicts, {"dispersive": s.to_dict()}


def verify_cm_section(points: int, L: float):
    sym_L = analysis.m1_symbol(L, 1, 1)
    sym_2L = analysis.m1_symbol(2 * L, 1, 1)
    c1 = analysis.estimate_cm_norm(sym_L, (2.1 * L, 2.1), (points, points))
    c2 = analysis.estimate_cm_norm(sym_2L, (4.2 * L, 2.1), (points, points))
    ratio = c1 / c2
    a = lambda x1, x2: np.exp(-(x1**2 + x2**2))  # noqa: E731
    b = lambda y1, y2: 1.0 / (1.0 + y1**2 + y2**2) ** 2  # noqa: E731
    sep4 = analysis.estimate_cm_norm(lambda x1, x2, y1, y2: a(x1, x2) * b(y1, y2), (4.0, 5.0), (24, 32))
    sep2 = analysis.l1_inverse_transform_2d(a, 4.0, 24) * analysis.l1_inverse_transform_2d(b, 5.0, 32)
    rel = abs(sep4 / sep2 - 1.0)
    verdicts = [
        Verdict("cm_dyadic_scaling", 1.0 <= ratio <= 16.0, {"C_L": c1, "C_2L": c2, "ratio": ratio, "L": L}, "C(L)/C(2L) in [1, 16]"),
        Verdict("cm_separable", rel <= 0.01, {"four_d": sep4, "two_2d": sep2, "relative": rel}, "<= 1%"),
    ]
    return verdicts, {"cm": {"C_L": c1, "C_2L": c2, "ratio": ratio}}


def cmd_verify(cfg: Mapping[str, Any], seed: int) -> RunRecord:
    verdicts, extra = verify_inequalities(
        int(cfg["verify.samples"]), seed, float(cfg["verify.gamma"]), int(cfg["verify.hls_fields"]), bool(cfg["verify.stability"])
    )
    if cfg["verify.dispersive"]:
        v, e = verify_dispersive_section(
            int(cfg["verify.dispersive_n"]),
            float(cfg["verify.dispersive_extent"]),
            float(cfg["verify.dispersive_width"]),
            int(cfg["verify.dispersive_t_max"]),
        )
        verdicts += v
        extra.update(e)
    if cfg["verify.cm"]:
        v, e = verify_cm_section(int(cfg["verify.cm_points"]), float(cfg["verify.cm_scale"]))
        verdicts += v
        extra.update(e)
    return RunRecord("verify", dict(cfg), seed, None, {}, verdicts, extra)


_HANDLERS = {
    "simulate": (cmd_simulate, {}),
    "linear-decay": (cmd_linear_decay, LINEAR_PRESET),
    "scattering": (cmd_scattering, SCATTERING_PRESET),
    "verify": (cmd_verify, {}),
}


def resolve_command_config(command: str, flat: Mapping[str, Any]) -> dict:
    if command not in _HANDLERS:
        raise UsageError(f"unknown command {command!r}")
    return resolved(flat, _HANDLERS[command][1])


def run_command(command: str, flat: Mapping[str, Any], seed: int = 0, root: str | Path | None = None) -> RunRecord:
    """Resolve the config, run ``command`` and write its record directory."""
    cfg = resolve_command_config(command, flat)
    handler = _HANDLERS[command][0]
    started = time.time()
    rec = handler(cfg, int(seed))
    finished = time.time()
    rec.timestamps = {
        "started": time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime(started)),
        "finished": time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime(finished)),
        "wall_seconds": finished - started,
    }
    write_record(rec, output_root(root) / rec.run_id)
    return rec


# --------------------------------------------------------------------------
# sweeps


def sweep_cells(manifest: Mapping[str, Any]) -> tuple[str, list[str], list[dict]]:
    """Expand a manifest into (command, axis keys, per-cell flat configs)."""
    command = manifest.get("sweep.command", "simulate")
    if command not in ("simulate", "linear-decay", "scattering"):
        raise ConfigurationError(f"sweep.command must be simulate, linear-decay or scattering, got {command!r}")
    base = {k: v for k, v in manifest.items() if not k.startswith(SWEEP_PREFIX)}
    axes = [k for k in manifest if k.startswith(SWEEP_PREFIX) and k != "sweep.command"]
    keys = [k[len(SWEEP_PREFIX) :] for k in axes]
    cells = []
    for combo in itertools.product(*(manifest[a] for a in axes)):
        cell = dict(base)
        cell.update(zip(keys, combo))
        cells.append(cell)
    return command, keys, cells


def _sweep_worker(args):
    command, cell, seed, root = args
    rec = run_command(command, cell, seed, root)
    return str(rec.directory), rec.summary()


def run_sweep(manifest: Mapping[str, Any], seed: int = 0, root: str | Path | None = None, jobs: int | None = None):
    command, keys, cells = sweep_cells(manifest)
    root = output_root(root)
    jobs = jobs or os.cpu_count() or 1
    tasks = [(command, c, seed, str(root)) for c in cells]
    if jobs == 1 or len(tasks) == 1:
        results = [_sweep_worker(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_worker, tasks))
    fit_names = sorted({k for _, s in results for k in s["fits"]})
    rows = []
    for cell, (path, summ) in zip(cells, results):
        row = {"run": Path(path).name}
        row.update({k: cell.get(k, summ["config"].get(k)) for k in keys})
        for f in fit_names:
            row[f] = summ["fits"][f]["exponent"] if f in summ["fits"] else float("nan")
        row["passed"] = summ["passed"]
        rows.append(row)
    sweep_id = f"sweep-{config_hash('sweep', dict(manifest), seed)}"
    out = root / sweep_id
    out.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = ["run"] + keys + fit_names + ["passed"]
    w.writerow(cols)
    for r in rows:
        w.writerow([repr(r[c]) if isinstance(r[c], float) else r[c] for c in cols])
    (out / "report.csv").write_text(buf.getvalue())
    (out / "report.json").write_text(_json({"command": command, "axes": keys, "rows": rows}))
    return out, rows


def plot_record(directory: str | Path, channel: str, out: str | Path | None = None) -> Path:
    rec = load_record(directory)
    if rec.series is None:
        raise UsageError(f"record {directory} has no time series")
    y = rec.series[channel]
    fit = rec.fits.get(channel)
    ov = (fit.exponent, fit.log_amplitude, *fit.window) if fit is not None else None
    svg = loglog_svg(rec.series.times, y, channel, ov)
    path = Path(out) if out else Path(directory) / "plots" / f"{_safe(channel)}.svg"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(svg)
    return path


def load_manifest(path: str | Path) -> dict:
    return load_config(path, allow_sweep=True)
