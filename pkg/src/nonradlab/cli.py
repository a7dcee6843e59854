"""Command-line front end: ``nonradlab <command> [options]``.

Commands write into one directory per run with fixed file names and a
``manifest.json`` listing every output with its SHA-256. Options can come
from an INI file (``--config``; any section, keys named like the flags)
and are overridden by flags given on the command line.

Exit codes: 0 success, 1 invalid input or configuration, 2 numerical
failure (step-size collapse, blow-up inside a run).
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .channel_diagnostics import decay_report, projection_from_arrays
from .core import derive_params
from .exterior_wave import (
    WaveConfig,
    bump_data,
    bump_velocity_primitive,
    evolve,
    make_initial_state,
    self_similar_data,
    stationary_data,
    tabulated_data,
)
from .export import read_csv, read_trajectory, sha256_file, write_csv, write_json, write_rows, write_trajectory
from .profile_ode import ProfileConfig, find_bounded_profiles, profile_sidecar, solve_profile
from .rk import IntegrationError
from .stationary import StationaryConfig, evaluate_rescaled, rescaled_derivative, solve_stationary, stationary_sidecar

OUTPUT_ROOT_ENV = "NONRADLAB_OUTPUT_ROOT"
COMMANDS = ("profile", "shoot", "stationary", "simulate", "diagnose", "sweep")


class ConfigError(ValueError):
    """Invalid command line or configuration file."""


@dataclass(frozen=True)
class Option:
    flag: str
    kind: type
    default: object
    help: str
    commands: tuple = COMMANDS

    @property
    def dest(self) -> str:
        return self.flag.lstrip("-").replace("-", "_")


_SOLVE = ("profile", "shoot", "stationary", "sweep")
_PDE = ("simulate", "sweep")
OPTIONS = [
    Option("--p", float, 4.0, "nonlinearity exponent, 3 < p < 5"),
    Option("--zeta", int, -1, "+1 focusing, -1 defocusing"),
    Option("--rtol", float, 1e-10, "relative ODE tolerance", _SOLVE),
    Option("--atol", float, 1e-12, "absolute ODE tolerance", _SOLVE),
    Option("--a", float, None, "shooting parameter f'(0)", ("profile", "simulate")),
    Option("--delta", float, 1e-8, "profile endpoint margin 1 - x_end", ("profile", "shoot", "sweep")),
    Option("--h-max", float, None, "largest profile step in -log(1-x)", ("profile", "shoot", "sweep")),
    Option("--a-range", str, "0:50", "shooting interval lo:hi", ("shoot",)),
    Option("--scan", int, 500, "number of scan samples", ("shoot",)),
    Option("--a-tol", float, 1e-12, "relative bisection width", ("shoot",)),
    Option("--R-inf", float, 1e4, "stationary seeding radius", ("stationary", "sweep")),
    Option("--Z-max", float, 1e12, "blow-up threshold", ("stationary", "sweep")),
    Option("--r-min", float, 1e-3, "smallest radius for focusing runs", ("stationary", "sweep")),
    Option("--r-tol", float, 1e-8, "relative width of the blow-up bracket", ("stationary", "sweep")),
    Option("--data", str, "self-similar", "self-similar | stationary | bump | file", ("simulate",)),
    Option("--C", float, 1.0, "rescaling constant of stationary data", ("simulate",)),
    Option("--center", float, 3.0, "bump centre", ("simulate",)),
    Option("--width", float, 1.0, "bump half-width", ("simulate",)),
    Option("--amplitude", float, 1.0, "bump amplitude (in w = r u)", ("simulate",)),
    Option("--data-file", str, None, "CSV with columns r, u0, u1", ("simulate",)),
    Option("--R0", float, 0.5, "truncation radius", _PDE),
    Option("--dr", float, 2.0**-7, "grid spacing", _PDE),
    Option("--lam", float, 1.0, "Courant number dt/dr", _PDE),
    Option("--T", float, 1.0, "final time", _PDE),
    Option("--r-max", float, None, "outer radius (default from the causal budget)", _PDE),
    Option("--record-dt", float, None, "time between snapshots (default T/10)", ("simulate",)),
    Option("--run", str, None, "run directory written by simulate", ("diagnose",)),
    Option("--R", float, 0.5, "exterior offset R in r > |t| + R", ("diagnose",)),
    Option("--t-min", float, None, "first time used in the decay fit", ("diagnose",)),
    Option("--t-max", float, None, "last time used in the decay fit", ("diagnose",)),
    Option("--kind", str, "a", "sweep over a (profiles), p (blow-up radius), C (angle) or decay", ("sweep",)),
    Option("--values", str, "", "comma list, lo:hi:n or log:lo:hi:n", ("sweep",)),
    Option("--R-values", str, "1,10,100", "projection radii for the C sweep", ("sweep",)),
    Option("--jobs", int, 1, "parallel sub-runs", ("sweep",)),
]
_BY_DEST = {o.dest: o for o in OPTIONS}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nonradlab", description="Exterior solutions of radial semilinear wave equations.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for cmd in COMMANDS:
        sp = sub.add_parser(cmd)
        sp.add_argument("--config", default=None, help="INI file with option values")
        sp.add_argument("--out", default=None, help=f"output directory (default under ${OUTPUT_ROOT_ENV})")
        sp.add_argument("--figures", action="store_true", default=None, help="also render PNG figures")
        for opt in OPTIONS:
            if cmd in opt.commands:
                sp.add_argument(opt.flag, dest=opt.dest, type=opt.kind, default=None, help=opt.help)
    return parser


def _read_config(path: str, command: str) -> dict:
    cp = configparser.ConfigParser()
    cp.optionxform = str  # keep the case of keys such as R0 and Z-max
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    values = {}
    for section in cp.sections():
        for key, raw in cp.items(section):
            dest = key.replace("-", "_")
            if dest.lower() == "figures":
                values["figures"] = cp.getboolean(section, key)
                continue
            if dest.lower() == "out":
                values["out"] = raw
                continue
            opt = _BY_DEST.get(dest) or _BY_DEST.get(_case_insensitive(dest.lower()))
            if opt is None:
                raise ConfigError(f"unknown config key {key!r} in [{section}]")
            if command not in opt.commands:
                continue
            try:
                values[opt.dest] = opt.kind(raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc
    return values


def _case_insensitive(dest: str) -> str | None:
    for name in _BY_DEST:
        if name.lower() == dest:
            return name
    return None


def resolve(argv: list[str]) -> dict:
    """Parse flags, merge the config file underneath and fill defaults."""
    ns = build_parser().parse_args(argv)
    cmd = ns.command
    flags = {k: v for k, v in vars(ns).items() if v is not None}
    merged = {}
    if ns.config:
        merged.update(_read_config(ns.config, cmd))
    merged.update(flags)
    cfg = {"command": cmd}
    for opt in OPTIONS:
        if cmd in opt.commands:
            cfg[opt.dest] = merged.get(opt.dest, opt.default)
    cfg["figures"] = bool(merged.get("figures", False))
    cfg["out"] = merged.get("out")
    return cfg


def _finite(name: str, value, *, positive=False, nonneg=False):
    if value is None or not math.isfinite(value):
        raise ConfigError(f"{name} must be a finite number")
    if positive and not value > 0:
        raise ConfigError(f"{name} must be positive")
    if nonneg and value < 0:
        raise ConfigError(f"{name} must be non-negative")
    return value


def parse_range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(x) for x in text.split(":"))
    except ValueError as exc:
        raise ConfigError(f"range {text!r} is not lo:hi") from exc
    if not (math.isfinite(lo) and math.isfinite(hi) and 0 <= lo < hi):
        raise ConfigError(f"range {text!r} needs 0 <= lo < hi")
    return lo, hi


def parse_values(text: str) -> list[float]:
    """'1,2,3', 'lo:hi:n' (linear) or 'log:lo:hi:n' (geometric); '' is empty."""
    text = text.strip()
    if not text:
        return []
    try:
        if text.startswith("log:"):
            lo, hi, n = text[4:].split(":")
            vals = np.geomspace(float(lo), float(hi), int(n))
        elif ":" in text:
            lo, hi, n = text.split(":")
            vals = np.linspace(float(lo), float(hi), int(n))
        else:
            vals = np.array([float(x) for x in text.split(",") if x.strip()])
    except ValueError as exc:
        raise ConfigError(f"cannot parse values {text!r}") from exc
    if not np.all(np.isfinite(vals)):
        raise ConfigError("sweep values must be finite")
    return [float(v) for v in vals]


def validate(cfg: dict) -> None:
    """Reject every precondition violation before any numerics run."""
    cmd = cfg["command"]
    try:
        derive_params(cfg["p"], cfg["zeta"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if "rtol" in cfg:
        _finite("rtol", cfg["rtol"], positive=True)
        _finite("atol", cfg["atol"], nonneg=True)
    if "delta" in cfg:
        d = _finite("delta", cfg["delta"], positive=True)
        if d >= 0.5:
            raise ConfigError("delta must lie in (0, 0.5)")
        if cfg.get("h_max") is not None:
            _finite("h-max", cfg["h_max"], positive=True)
    if cmd in ("profile", "shoot") and cfg["zeta"] != -1:
        raise ConfigError("self-similar profiles are defined for the defocusing sign (zeta = -1)")
    if cmd == "profile":
        _finite("a", cfg["a"])
    if cmd == "shoot":
        parse_range(cfg["a_range"])
        if cfg["scan"] < 2:
            raise ConfigError("scan needs at least 2 samples")
        _finite("a-tol", cfg["a_tol"], positive=True)
    if "R_inf" in cfg:
        if not _finite("R-inf", cfg["R_inf"]) > 1:
            raise ConfigError("R-inf must exceed 1")
        if not 0 < _finite("r-min", cfg["r_min"]) < 1:
            raise ConfigError("r-min must lie in (0, 1)")
        _finite("Z-max", cfg["Z_max"], positive=True)
        _finite("r-tol", cfg["r_tol"], positive=True)
    if "dr" in cfg:
        _finite("R0", cfg["R0"], positive=True)
        _finite("dr", cfg["dr"], positive=True)
        if not 0 < _finite("lam", cfg["lam"]) <= 1:
            raise ConfigError("lam must lie in (0, 1]")
        _finite("T", cfg["T"], nonneg=True)
        if cfg["r_max"] is not None:
            _finite("r-max", cfg["r_max"], positive=True)
    if cmd == "simulate":
        kind = cfg["data"]
        if kind not in ("self-similar", "stationary", "bump", "file"):
            raise ConfigError(f"unknown data kind {kind!r}")
        if kind == "self-similar":
            _finite("a", cfg["a"])
        if kind == "stationary":
            _finite("C", cfg["C"])
        if kind == "bump":
            _finite("width", cfg["width"], positive=True)
            _finite("amplitude", cfg["amplitude"])
            if not _finite("center", cfg["center"]) - cfg["width"] > 0:
                raise ConfigError("bump must lie in r > 0")
        if kind == "file" and not (cfg["data_file"] and Path(cfg["data_file"]).is_file()):
            raise ConfigError("data kind 'file' needs an existing --data-file")
        if cfg["record_dt"] is not None:
            _finite("record-dt", cfg["record_dt"], positive=True)
        dt = cfg["lam"] * cfg["dr"]
        if abs(round(cfg["T"] / dt) * dt - cfg["T"]) > 1e-9 * max(1.0, cfg["T"]):
            raise ConfigError("T must be a multiple of the time step lam*dr")
    if cmd == "diagnose":
        if not cfg["run"]:
            raise ConfigError("diagnose needs --run")
        if _trajectory_dir(cfg["run"]) is None:
            raise ConfigError(f"no trajectory found under {cfg['run']}")
        _finite("R", cfg["R"], positive=True)
    if cmd == "sweep":
        if cfg["kind"] not in ("a", "p", "C", "decay"):
            raise ConfigError(f"unknown sweep kind {cfg['kind']!r}")
        vals = parse_values(cfg["values"])
        if cfg["kind"] == "p" and any(not 3 < v < 5 for v in vals):
            raise ConfigError("p values must lie in (3, 5)")
        if cfg["kind"] == "C":
            if any(r <= 0 for r in parse_values(cfg["R_values"])):
                raise ConfigError("projection radii must be positive")
        if cfg["jobs"] < 1:
            raise ConfigError("jobs must be at least 1")


def _trajectory_dir(run: str) -> Path | None:
    base = Path(run)
    for cand in (base / "trajectory", base):
        if (cand / "trajectory.json").is_file():
            return cand
    return None


def _config_hash(cfg: dict) -> str:
    echo = {k: v for k, v in cfg.items() if k not in ("out", "figures", "jobs")}
    return hashlib.sha256(json.dumps(echo, sort_keys=True, default=str).encode()).hexdigest()[:12]


def output_dir(cfg: dict) -> Path:
    if cfg.get("out"):
        out = Path(cfg["out"])
    else:
        root = Path(os.environ.get(OUTPUT_ROOT_ENV, "runs"))
        out = root / f"{cfg['command']}-{_config_hash(cfg)}"
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"output directory {out} is not writable: {exc}") from exc
    return out


# -- commands --------------------------------------------------------------


def _profile_cfg(cfg: dict, **extra) -> ProfileConfig:
    return ProfileConfig(rtol=cfg["rtol"], atol=cfg["atol"], delta=cfg["delta"], h_max=cfg.get("h_max"), **extra)


def _stationary_cfg(cfg: dict) -> StationaryConfig:
    return StationaryConfig(
        R_inf=cfg["R_inf"], r_min=cfg["r_min"], rtol=cfg["rtol"], atol=cfg["atol"], Z_max=cfg["Z_max"], r_tol=cfg["r_tol"]
    )


def cmd_profile(cfg: dict, out: Path) -> tuple[list[Path], list[Path], dict]:
    params = derive_params(cfg["p"], -1)
    sol = solve_profile(cfg["a"], params, _profile_cfg(cfg))
    files = [
        write_csv(out / "profile.csv", ["x", "f", "f_prime", "g"], [sol.x, sol.f, sol.f_prime, sol.g]),
        write_json(out / "profile.json", profile_sidecar(sol)),
    ]
    figs = []
    if cfg["figures"]:
        from .plotting import plot_profile

        figs.append(plot_profile(out / "profile.png", sol.x, sol.f, sol.f_prime, sol.a))
    return files, figs, {"G": sol.G, "f1": sol.f1, "N_extrema": sol.N_extrema}


def cmd_shoot(cfg: dict, out: Path):
    params = derive_params(cfg["p"], -1)
    lo, hi = parse_range(cfg["a_range"])
    roots, grid, Gs = find_bounded_profiles(params, lo, hi, cfg["scan"], _profile_cfg(cfg, a_tol=cfg["a_tol"]), return_scan=True)
    files = [
        write_csv(out / "scan.csv", ["a", "G"], [grid, Gs]),
        write_json(out / "roots.json", {"p": params.p, "a_range": [lo, hi], "scan": cfg["scan"],
                                        "roots": [{"a": a, "abs_G": g} for a, g in roots]}),
    ]
    figs = []
    if cfg["figures"]:
        from .plotting import plot_scan

        figs.append(plot_scan(out / "scan.png", grid, Gs, [a for a, _ in roots]))
    return files, figs, {"n_roots": len(roots), "roots": " ".join(f"{a:.12g}" for a, _ in roots)}


def cmd_stationary(cfg: dict, out: Path):
    params = derive_params(cfg["p"], cfg["zeta"])
    prof = solve_stationary(cfg["zeta"], params, _stationary_cfg(cfg))
    files = [
        write_csv(out / "profile.csv", ["r", "z", "z_prime", "U"], [prof.r, prof.z, prof.z_prime, prof.U]),
        write_json(out / "profile.json", stationary_sidecar(prof)),
    ]
    figs = []
    if cfg["figures"]:
        from .plotting import plot_stationary

        figs.append(plot_stationary(out / "profile.png", prof.r, prof.z, None if prof.R_minus is None else prof.R_minus[1]))
    summary = {"nodes": prof.r.size}
    if prof.R_minus is not None:
        summary["R_minus_lo"], summary["R_minus_hi"] = prof.R_minus
    return files, figs, summary


def _simulation_data(cfg: dict, params):
    """(u0, u1, primitive, support, descriptor) for the requested data kind."""
    kind = cfg["data"]
    if kind == "self-similar":
        u0, u1 = self_similar_data(cfg["a"], params)
        return u0, u1, None, None, {"kind": kind, "a": cfg["a"]}
    if kind == "stationary":
        prof = solve_stationary(params.zeta, params)
        u0, u1 = stationary_data(prof, cfg["C"])
        return u0, u1, None, None, {"kind": kind, "C": cfg["C"]}
    if kind == "bump":
        c, w, amp = cfg["center"], cfg["width"], cfg["amplitude"]
        u0, u1 = bump_data(c, w, amp)
        desc = {"kind": kind, "center": c, "width": w, "amplitude": amp}
        return u0, u1, bump_velocity_primitive(c, w, amp), c + w, desc
    cols = read_csv(Path(cfg["data_file"]))
    missing = {"r", "u0", "u1"} - set(cols)
    if missing:
        raise ConfigError(f"data file lacks columns {sorted(missing)}")
    u0, u1 = tabulated_data(cols["r"], cols["u0"], cols["u1"])
    desc = {"kind": kind, "path": str(cfg["data_file"]), "sha256": sha256_file(cfg["data_file"])}
    return u0, u1, None, float(cols["r"][-1]), desc


def _wave_config(cfg: dict, params, support) -> WaveConfig:
    r_max = cfg["r_max"]
    if r_max is None and support is None:
        r_max = cfg["R0"] + 2 * cfg["T"] + 10.0
    return WaveConfig(params, R0=cfg["R0"], dr=cfg["dr"], T_max=cfg["T"], lam=cfg["lam"], r_max=r_max, support=support)


def cmd_simulate(cfg: dict, out: Path):
    params = derive_params(cfg["p"], cfg["zeta"])
    u0, u1, prim, support, desc = _simulation_data(cfg, params)
    wcfg = _wave_config(cfg, params, support)
    state = make_initial_state(u0, u1, wcfg, u1_primitive=prim)
    dt = wcfg.dt
    rec_dt = cfg["record_dt"] if cfg["record_dt"] is not None else max(cfg["T"] / 10.0, dt)
    every = max(1, int(round(rec_dt / dt)))
    traj = evolve(state, cfg["T"], every)
    files = write_trajectory(out / "trajectory", traj, desc)
    figs = []
    if cfg["figures"]:
        from .plotting import plot_snapshots

        figs.append(plot_snapshots(out / "snapshots.png", traj))
    return files, figs, {"snapshots": len(traj.snapshots), "checksum": traj.checksum()}


def cmd_diagnose(cfg: dict, out: Path):
    traj = read_trajectory(_trajectory_dir(cfg["run"]))
    t_range = None
    if cfg["t_min"] is not None or cfg["t_max"] is not None:
        t_range = (cfg["t_min"] if cfg["t_min"] is not None else 0.0, cfg["t_max"] if cfg["t_max"] is not None else math.inf)
    rep = decay_report(traj, cfg["R"], t_range=t_range)
    (out / "report.csv").write_text(rep.to_csv())
    files = [write_json(out / "report.json", rep.to_dict()), out / "report.csv"]
    figs = []
    if cfg["figures"]:
        from .plotting import plot_energy

        figs.append(plot_energy(out / "energy.png", rep.times, rep.E_ext, rep.decay_fit))
    exponent = rep.decay_fit.exponent if rep.decay_fit is not None else float("nan")
    return files, figs, {"verdict": rep.verdict, "decay_exponent": exponent, "C_fit": rep.C_fit}


# sweep workers are module-level so that they pickle for process pools


def _sweep_a(args):
    cfg, a = args
    try:
        sol = solve_profile(a, derive_params(cfg["p"], -1), _profile_cfg(cfg))
        return [a, sol.G, sol.f1, sol.N_extrema, None]
    except (ValueError, IntegrationError, FloatingPointError) as exc:
        return [a, None, None, None, str(exc)]


def _sweep_p(args):
    cfg, p = args
    try:
        prof = solve_stationary(-1, derive_params(p, -1), _stationary_cfg(cfg))
        return [p, prof.R_minus[0], prof.R_minus[1], p ** (-2 * (p - 1) / (p - 3)), None]
    except (ValueError, IntegrationError, FloatingPointError) as exc:
        return [p, None, None, None, str(exc)]


def _sweep_C(args):
    cfg, C, radii = args
    rows = []
    try:
        params = derive_params(cfg["p"], 1)
        prof = solve_stationary(1, params, _stationary_cfg(cfg))
    except (ValueError, IntegrationError, FloatingPointError) as exc:
        return [[C, R, None, None, str(exc)] for R in radii]
    for R in radii:
        try:
            r = np.geomspace(R, 1e4 * R, 20001)
            u = evaluate_rescaled(prof, C, r)
            u_r = rescaled_derivative(prof, C, r)
            lam, cos = projection_from_arrays(r, u, u_r, np.zeros_like(r), R)
            rows.append([C, R, lam, cos, None])
        except (ValueError, IntegrationError, FloatingPointError) as exc:
            rows.append([C, R, None, None, str(exc)])
    return rows


def _sweep_decay(args):
    cfg, a = args
    try:
        params = derive_params(cfg["p"], cfg["zeta"])
        wcfg = _wave_config(cfg, params, None)
        state = make_initial_state(*self_similar_data(a, params), wcfg)
        every = max(1, int(round(max(cfg["T"] / 20.0, wcfg.dt) / wcfg.dt)))
        rep = decay_report(evolve(state, cfg["T"], every), cfg["R0"])
        exp_ = rep.decay_fit.exponent if rep.decay_fit is not None else None
        return [a, exp_, rep.verdict, None]
    except (ValueError, IntegrationError, FloatingPointError) as exc:
        return [a, None, None, str(exc)]


_SWEEPS = {
    "a": (_sweep_a, ["a", "G", "f1", "N_extrema", "error"], "N_extrema"),
    "p": (_sweep_p, ["p", "R_minus_lo", "R_minus_hi", "R_minus_bound", "error"], "R_minus_lo"),
    "C": (_sweep_C, ["C", "R", "lambda", "cos_angle", "error"], "cos_angle"),
    "decay": (_sweep_decay, ["a", "decay_exponent", "verdict", "error"], "decay_exponent"),
}


def cmd_sweep(cfg: dict, out: Path):
    worker, header, ycol = _SWEEPS[cfg["kind"]]
    values = parse_values(cfg["values"])
    if cfg["kind"] == "C":
        radii = parse_values(cfg["R_values"])
        tasks = [(cfg, v, radii) for v in values]
    else:
        tasks = [(cfg, v) for v in values]
    if cfg["jobs"] > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg["jobs"]) as pool:
            results = list(pool.map(worker, tasks))  # map keeps task order
    else:
        results = [worker(t) for t in tasks]
    rows = [row for res in results for row in (res if cfg["kind"] == "C" else [res])]
    files = [write_rows(out / "sweep.csv", header, rows)]
    figs = []
    if cfg["figures"] and rows:
        from .plotting import plot_sweep

        yi = header.index(ycol)
        xs = [row[0] for row in rows]
        ys = [float("nan") if row[yi] is None else float(row[yi]) for row in rows]
        figs.append(plot_sweep(out / "sweep.png", xs, ys, header[0], ycol))
    failed = sum(1 for row in rows if row[-1] is not None)
    return files, figs, {"rows": len(rows), "failed": failed}


_DISPATCH = {
    "profile": cmd_profile,
    "shoot": cmd_shoot,
    "stationary": cmd_stationary,
    "simulate": cmd_simulate,
    "diagnose": cmd_diagnose,
    "sweep": cmd_sweep,
}


def write_manifest(out: Path, cfg: dict, files: list[Path], figures: list[Path], wall: float) -> Path:
    entries = [{"path": str(Path(f).relative_to(out)), "sha256": sha256_file(f)} for f in files]
    manifest = {
        "command": cfg["command"],
        "config": {k: v for k, v in cfg.items() if k != "out"},
        "version": __version__,
        "wall_time_s": wall,
        "files": sorted(entries, key=lambda e: e["path"]),
        "figures": sorted(str(Path(f).relative_to(out)) for f in figures),
    }
    return write_json(out / "manifest.json", manifest)


def run(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        cfg = resolve(argv)
        validate(cfg)
        out = output_dir(cfg)
        start = time.perf_counter()
        files, figs, summary = _DISPATCH[cfg["command"]](cfg, out)
        write_manifest(out, cfg, files, figs, time.perf_counter() - start)
    except ConfigError as exc:
        print(f"nonradlab: error: {exc}", file=sys.stderr)
        return 1
    except (IntegrationError, FloatingPointError) as exc:
        print(f"nonradlab: numerical failure: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"nonradlab: error: {exc}", file=sys.stderr)
        return 1
    print(f"output\t{out}")
    for key, val in summary.items():
        print(f"{key}\t{val}")
    return 0


def main() -> None:
    sys.exit(run())
