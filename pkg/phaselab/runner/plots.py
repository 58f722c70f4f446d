"""
SVG figures for run directories. Plotting is best-effort: callers log and
carry on if a figure cannot be drawn.
"""
import logging
from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

logger = logging.getLogger(__name__)

# fixed metadata keeps repeated runs byte-identical
SVG_METADATA = {"Date": None, "Creator": "phaselab"}
plt.rcParams["svg.hashsalt"] = "phaselab"


def line_plot(path: Path, x: Sequence[float], series: Mapping[str, Sequence[float]],
              xlabel: str, ylabel: str, title: str) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4))
    try:
        for label, y in series.items():
            ax.plot(x, y, label=label)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        ax.set_title(title)
        if len(series) > 1:
            ax.legend()
        ax.grid(alpha=0.3)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata=SVG_METADATA)
    finally:
        plt.close(fig)
    return path


def heat_plot(path: Path, x: Sequence[float], t: Sequence[float], values: np.ndarray,
              xlabel: str, title: str) -> Path:
    """values has shape (len(t), len(x))."""
    fig, ax = plt.subplots(figsize=(7, 4))
    try:
        mesh = ax.pcolormesh(np.asarray(x), np.asarray(t), np.asarray(values), shading="auto")
        fig.colorbar(mesh, ax=ax)
        ax.set_xlabel(xlabel)
        ax.set_ylabel("t")
        ax.set_title(title)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata=SVG_METADATA)
    finally:
        plt.close(fig)
    return path
