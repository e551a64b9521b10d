"""Result files for sweep runs: CSV table, run manifest and SVG plot"""

import os
import logging
from dataclasses import dataclass
from datetime import datetime
from typing import Dict, Optional

import numpy as np
import pandas as pd

from .config import CSV_COLUMNS, VERSION

logger = logging.getLogger(__name__)


@dataclass
class RunManifest:
    """Everything needed to re-run a sweep and get the same CSV bytes"""

    settings: Dict[str, str]
    seed: int
    axis: str
    values: str
    csv_path: str
    manifest_path: str
    plot_path: Optional[str] = None
    version: str = VERSION
    timestamp: str = ""

    def to_text(self) -> str:
        lines = ["# backscatter-sim run manifest", "# re-run with: backscatter-sim sweep <this file> --out <prefix>"]
        for key in sorted(self.settings):
            if key != "seed":
                lines.append(f"{key} = {self.settings[key]}")
        lines.append(f"seed = {self.seed}")
        lines.append(f"axis = {self.axis}")
        lines.append(f"values = {self.values}")
        lines.append(f"version = {self.version}")
        lines.append(f"timestamp = {self.timestamp or datetime.now().strftime('%Y-%m-%dT%H:%M:%S')}")
        lines.append(f"csv_path = {self.csv_path}")
        lines.append(f"manifest_path = {self.manifest_path}")
        if self.plot_path:
            lines.append(f"plot_path = {self.plot_path}")
        return "\n".join(lines) + "\n"


def _atomic_write_text(path: str, text: str):
    tmp_path = f"{path}.tmp"
    try:
        with open(tmp_path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp_path, path)
    except OSError:
        _discard(tmp_path)
        raise


def _discard(tmp_path: str):
    try:
        os.remove(tmp_path)
    except OSError:
        pass


def format_axis_value(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), "g")


def table_to_csv(table: pd.DataFrame) -> str:
    """Locale-independent CSV text: fixed column order, 6 significant digits"""
    out = table.loc[:, CSV_COLUMNS].copy()
    out["axis"] = out["axis"].map(format_axis_value)
    out["errors"] = out["errors"].astype(int)
    out["trials"] = out["trials"].astype(int)
    return out.to_csv(index=False, float_format="%.5e", na_rep="", lineterminator="\n")


def write_manifest(manifest: RunManifest):
    _atomic_write_text(manifest.manifest_path, manifest.to_text())
    logger.info(f"Saved run manifest to: {manifest.manifest_path}")


def write_csv(table: pd.DataFrame, path: str):
    _atomic_write_text(path, table_to_csv(table))
    logger.info(f"Saved result table to: {path}")


def write_plot(table: pd.DataFrame, path: str, axis_label: str, title: str = ""):
    """BER against the sweep axis on a log scale, simulated points with 95% bars"""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 5))
    for i, (detector, rows) in enumerate(table.groupby("detector", sort=False)):
        color = f"C{i}"
        x = rows["axis"].astype(float).to_numpy()
        ax.errorbar(x, rows["ber_sim"], yerr=rows["ci95"], fmt="o", color=color,
                    capsize=3, label=f"{detector} (sim)")
        for column, style in (("ber_exact", "-"), ("ber_approx", "--"), ("ber_floor", ":")):
            values = rows[column].to_numpy(dtype=float)
            if np.isfinite(values).any():
                ax.plot(x, values, style, color=color, label=f"{detector} ({column[4:]})")

    ax.set_yscale("log", nonpositive="mask")
    ax.set_xlabel(axis_label)
    ax.set_ylabel("BER")
    if title:
        ax.set_title(title)
    ax.grid(True, which="both", linestyle=":", linewidth=0.5)
    ax.legend(fontsize="small")
    fig.tight_layout()

    tmp_path = f"{path}.tmp"
    try:
        fig.savefig(tmp_path, format="svg", metadata={"Date": None})
        os.replace(tmp_path, path)
    except OSError:
        _discard(tmp_path)
        raise
    finally:
        plt.close(fig)
    logger.info(f"Saved plot to: {path}")
