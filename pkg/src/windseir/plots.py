"""Figures from run artifacts: one totals time-series plot plus one heatmap
per snapshot file."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .errors import ConfigError
from .output import read_diagnostics_csv, read_snapshot


def emit_plots(run_dir: str | Path) -> list[Path]:
    run_dir = Path(run_dir)
    csv_path = run_dir / "diagnostics.csv"
    if not csv_path.exists():
        raise FileNotFoundError(f"no diagnostics.csv in {run_dir}")
    ids, records = read_diagnostics_csv(csv_path)
    if not records:
        raise ConfigError(f"{csv_path}: diagnostics series is empty")
    written: list[Path] = []

    t = [r.t for r in records]
    fig, ax = plt.subplots(figsize=(9, 5))
    for k, j in enumerate(ids):
        ax.plot(t, [r.subregions[k].s_total for r in records], label=f"S_{j}")
        ax.plot(t, [r.subregions[k].i_total for r in records], "--", label=f"I_{j}")
    ax.plot(t, [r.vi_total for r in records], ":", color="black", label="V_i")
    ax.set_xlabel("t (months)")
    ax.set_ylabel("total population")
    ax.legend(loc="best", fontsize=8)
    ax.set_title(run_dir.name)
    path = run_dir / "totals.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    for snap in sorted(run_dir.glob("snap_*.csv")):
        values, meta = read_snapshot(snap)
        fig, ax = plt.subplots(figsize=(8, 8 * meta["ny"] / max(meta["nx"], 1)))
        im = ax.imshow(
            values,
            origin="lower",
            extent=(0, meta["nx"] * meta["h"], 0, meta["ny"] * meta["h"]),
            aspect="equal",
            cmap="viridis",
        )
        fig.colorbar(im, ax=ax, shrink=0.7)
        ax.set_title(f"{snap.stem}  t={meta['t']:g} months")
        ax.set_xlabel("x (km)")
        ax.set_ylabel("y (km)")
        path = snap.with_suffix(".png")
        fig.savefig(path, dpi=110)
        plt.close(fig)
        written.append(path)
    return written
