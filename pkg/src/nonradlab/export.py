"""CSV / JSON writers, snapshot round-tripping and content checksums."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .core import Grid1D, ModelParams, derive_params
from .exterior_wave import Trajectory, WaveState


def _fmt(x) -> str:
    # repr round-trips doubles exactly, which keeps re-runs bitwise identical
    return repr(float(x))


def write_csv(path: Path, header: list[str], columns) -> Path:
    path = Path(path)
    cols = [np.asarray(c) for c in columns]
    if cols and len({c.size for c in cols}) != 1:
        raise ValueError("all CSV columns need the same length")
    with path.open("w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for row in zip(*cols):
            wr.writerow([_fmt(x) for x in row])
    return path


def write_rows(path: Path, header: list[str], rows) -> Path:
    """Rows of mixed values; floats are written with full precision."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for row in rows:
            wr.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else ("" if v is None else v) for v in row])
    return path


def read_csv(path: Path) -> dict[str, np.ndarray]:
    with Path(path).open(newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd)
        rows = [list(map(float, row)) for row in rd if row]
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    return {name: data[:, i] for i, name in enumerate(header)}


def _clean(obj):
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def write_json(path: Path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n")
    return path


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


SNAPSHOT_COLUMNS = ["r", "w", "u", "w_r", "w_t"]


def write_snapshot(path: Path, snap: WaveState) -> Path:
    return write_csv(path, SNAPSHOT_COLUMNS, [snap.r, snap.w_curr, snap.u(), snap.w_r(), snap.w_t()])


def write_trajectory(directory: Path, traj: Trajectory, data_descriptor: dict) -> list[Path]:
    """trajectory/NNNN.csv per snapshot plus trajectory/trajectory.json."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = [write_snapshot(directory / f"{i:04d}.csv", s) for i, s in enumerate(traj.snapshots)]
    meta = traj.manifest(data_descriptor)
    meta["times"] = traj.times
    paths.append(write_json(directory / "trajectory.json", meta))
    return paths


def read_trajectory(directory: Path) -> Trajectory:
    """Rebuild a trajectory from its CSV snapshots.

    Only w and the centred w_t are stored, so the neighbouring time levels
    are reconstructed as w ∓ Δt w_t; every diagnostic that uses w_t then
    sees the stored values.
    """
    directory = Path(directory)
    meta = json.loads((directory / "trajectory.json").read_text())
    params: ModelParams = derive_params(meta["p"], meta["zeta"])
    lam, R0 = float(meta["lambda"]), float(meta["R0"])
    files = sorted(directory.glob("[0-9][0-9][0-9][0-9].csv"))
    times = np.asarray(meta["times"], dtype=float)
    if len(files) != times.size:
        raise ValueError(f"{directory}: {len(files)} snapshot files for {times.size} recorded times")
    snaps = []
    grid = None
    for t, f in zip(times, files):
        cols = read_csv(f)
        if grid is None:
            grid = Grid1D(cols["r"], "uniform")
        dt = lam * float(grid.nodes[1] - grid.nodes[0])
        w, wt = cols["w"], cols["w_t"]
        n = int(round(t / dt))
        snaps.append(
            WaveState(
                t=float(t), n=n, r_grid=grid, w_curr=w, w_prev=w - dt * wt, params=params, R0=R0, lam=lam,
                w_next=w + dt * wt,
            )
        )
    config = {k: meta[k] for k in ("p", "zeta", "R0", "dr", "lambda", "r_max") if k in meta}
    return Trajectory(times=times, snapshots=tuple(snaps), config=config)
