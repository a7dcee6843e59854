"""Optional PNG figures for CLI runs (matplotlib, non-interactive backend)."""

from __future__ import annotations

from pathlib import Path

import numpy as np


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams.update({"figure.figsize": (6.0, 4.0), "axes.grid": True, "grid.alpha": 0.3, "font.size": 9})
    return plt


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    # no timestamps or version strings, so the bytes depend only on the data
    fig.savefig(path, dpi=120, metadata={"Software": None})
    fig.clf()
    return Path(path)


def plot_profile(path: Path, x, f, f_prime, a: float) -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots()
    ax.plot(x, f, label="f")
    ax.plot(x, f_prime, label="f'", lw=0.8)
    ax.set_xlabel("x = t/r")
    ax.set_title(f"self-similar profile, a = {a:.6g}")
    ax.legend()
    out = _save(fig, path)
    plt.close(fig)
    return out


def plot_scan(path: Path, a, G, roots) -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots()
    ax.plot(a, np.sign(G) * np.log10(1 + np.abs(G)), lw=0.8)
    for root in roots:
        ax.axvline(root, color="k", lw=0.5, ls=":")
    ax.set_xlabel("a")
    ax.set_ylabel("sign(G) log10(1 + |G|)")
    out = _save(fig, path)
    plt.close(fig)
    return out


def plot_stationary(path: Path, r, z, R_minus=None) -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots()
    ax.loglog(r, np.abs(z))
    if R_minus is not None:
        ax.axvline(R_minus, color="k", lw=0.5, ls=":")
    ax.set_xlabel("r")
    ax.set_ylabel("|z(r)|")
    out = _save(fig, path)
    plt.close(fig)
    return out


def plot_snapshots(path: Path, traj, max_lines: int = 8) -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots()
    snaps = traj.snapshots
    pick = np.unique(np.linspace(0, len(snaps) - 1, min(max_lines, len(snaps))).round().astype(int))
    for i in pick:
        s = snaps[i]
        keep = s.r <= s.valid_limit()
        ax.plot(s.r[keep], s.w_curr[keep], lw=0.8, label=f"t={s.t:.3g}")
    ax.set_xlabel("r")
    ax.set_ylabel("w = r u")
    ax.legend(fontsize=7)
    out = _save(fig, path)
    plt.close(fig)
    return out


def plot_energy(path: Path, times, E_ext, fit=None) -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots()
    sel = (np.asarray(times) > 0) & (np.asarray(E_ext) > 0)
    ax.loglog(np.asarray(times)[sel], np.asarray(E_ext)[sel], "o", ms=3, label="E_ext")
    if fit is not None:
        tt = np.asarray(times)[sel]
        ax.loglog(tt, fit(tt), lw=0.8, label=f"slope {fit.exponent:.3f}")
    ax.set_xlabel("t")
    ax.set_ylabel("exterior energy")
    ax.legend()
    out = _save(fig, path)
    plt.close(fig)
    return out


def plot_sweep(path: Path, x, y, xlabel: str, ylabel: str) -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots()
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    ok = np.isfinite(x) & np.isfinite(y)
    ax.plot(x[ok], y[ok], "o-", ms=3)
    if np.all(x[ok] > 0) and np.all(y[ok] > 0) and ok.sum() > 1:
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    out = _save(fig, path)
    plt.close(fig)
    return out
