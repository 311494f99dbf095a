"""Delimited output, gnuplot-style grids, manifests, and figure rendering.

All numeric text output uses a fixed %.12e field format so that reruns at
a fixed thread count are byte-identical.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from . import __version__

_FMT = "%.12e"


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return _FMT % float(value)


def write_csv(path, fieldnames: list[str], rows: list[dict]) -> Path:
    path = Path(path)
    lines = [",".join(fieldnames)]
    for row in rows:
        lines.append(",".join(_fmt(row.get(name, "")) for name in fieldnames))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_json(path, payload: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(payload, indent=1, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"not JSON serializable: {type(obj)}")


def write_spacetime_grid(path, times: np.ndarray, sites: np.ndarray, grid: np.ndarray) -> Path:
    """Gnuplot-compatible blocks: one (time, site, value) triple per line,
    blank line between time slices."""
    path = Path(path)
    chunks = []
    for ti, t in enumerate(times):
        rows = "\n".join(
            f"{_FMT % t} {_FMT % s} {_FMT % grid[ti, si]}" for si, s in enumerate(sites)
        )
        chunks.append(rows)
    path.write_text("\n\n".join(chunks) + "\n")
    return path


def config_hash(resolved: dict) -> str:
    blob = json.dumps(resolved, sort_keys=True, default=_json_default).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def build_manifest(command: str, resolved_config: dict, outputs: list[str], extra: dict | None = None) -> dict:
    manifest = {
        "command": command,
        "package_version": __version__,
        "resolved_config": resolved_config,
        "config_hash": config_hash(resolved_config),
        "outputs": sorted(outputs),
    }
    if extra:
        manifest["extra"] = extra
    return manifest


# ---------------------------------------------------------------------------
# figures
# ---------------------------------------------------------------------------

def fig_population_series(path, rows: list[dict], keys: list[str] | None = None) -> Path:
    path = Path(path)
    keys = keys or ["P_I", "P_II", "P_D", "t2", "r2", "u_plus2", "u_minus2"]
    t = [row["time"] for row in rows]
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for key in keys:
        if rows and key in rows[0]:
            ax.plot(t, [row[key] for row in rows], label=key, lw=1.2)
    ax.set_xlabel("time (1/J)")
    ax.set_ylabel("population")
    ax.set_ylim(-0.02, 1.05)
    ax.legend(fontsize=8, ncol=2)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def fig_spacetime(path, times: np.ndarray, grid: np.ndarray, emitter_sites=()) -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    mesh = ax.pcolormesh(
        np.arange(grid.shape[1]), times, grid, shading="auto", cmap="magma", rasterized=True
    )
    for s in emitter_sites:
        ax.axvline(s, color="w", ls=":", lw=0.6, alpha=0.6)
    fig.colorbar(mesh, ax=ax, label="photon number")
    ax.set_xlabel("site")
    ax.set_ylabel("time (1/J)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def fig_sweep(path, rows: list[dict], x_key: str, y_keys: list[str] | None = None) -> Path:
    path = Path(path)
    y_keys = y_keys or ["t2", "r2", "u_plus2", "u_minus2"]
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    x = [row[x_key] for row in rows]
    for key in y_keys:
        if rows and key in rows[0]:
            ax.plot(x, [row[key] for row in rows], marker=".", ms=3, lw=1.0, label=key)
    ax.set_xlabel(x_key)
    ax.set_ylabel("population")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def fig_bands(path, table: dict) -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(5.6, 4.2))
    k = table["momentum"]
    ax.plot(k, table["single_photon_energy"], label="single photon")
    if "doublon_energy" in table:
        ax.plot(k, table["doublon_energy"], label="photon pair")
    if "triplon_energy" in table:
        ax.plot(k, table["triplon_energy"], label="photon triple")
    ax.set_xlabel("momentum")
    ax.set_ylabel("energy (J)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def fig_heatmap(path, x, y, grid: np.ndarray, xlabel: str, ylabel: str, title: str = "") -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(5.6, 4.2))
    mesh = ax.pcolormesh(x, y, grid.T, shading="auto", cmap="viridis", rasterized=True)
    fig.colorbar(mesh, ax=ax)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
