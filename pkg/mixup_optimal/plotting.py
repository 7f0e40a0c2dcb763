"""SVG figures written by the command-line interface.

Matplotlib runs on the Agg backend.  A fixed ``svg.hashsalt`` and an empty
``Date`` metadata entry make repeated runs write byte-identical files.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from numpy.typing import NDArray  # noqa: E402

from mixup_optimal.constants import SVG_HASHSALT  # noqa: E402
from mixup_optimal.models.dataset import LabeledDataset  # noqa: E402
from mixup_optimal.models.oracle import BoundaryGrid, GridSpec  # noqa: E402

logger = logging.getLogger(__name__)

_CLASS_COLOURS = ("tab:blue", "tab:orange", "tab:green", "tab:red", "tab:purple")


def _save(fig: plt.Figure, path: str | Path) -> None:
    with matplotlib.rc_context({"svg.hashsalt": SVG_HASHSALT, "svg.fonttype": "none"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.debug("wrote %s", path)


def _scatter_classes(ax: plt.Axes, ds: LabeledDataset) -> None:
    for cls in range(1, ds.k + 1):
        pts = ds.class_points(cls)
        ax.scatter(
            pts[:, 0],
            pts[:, 1],
            s=12,
            color=_CLASS_COLOURS[(cls - 1) % len(_CLASS_COLOURS)],
            edgecolors="black",
            linewidths=0.3,
            label=f"class {cls}",
        )


def plot_probability_map(
    probs: NDArray[np.float64],
    spec: GridSpec,
    ds: LabeledDataset,
    path: str | Path,
    *,
    title: str = "",
) -> None:
    """Heatmap of the class-1 probability with its ½ contour and the data."""
    p1 = np.ma.masked_invalid(probs[:, :, 0])
    fig, ax = plt.subplots(figsize=(6, 5))
    mesh = ax.pcolormesh(
        spec.xs, spec.ys, p1, cmap="RdBu_r", vmin=0.0, vmax=1.0, shading="auto"
    )
    if np.any(p1 > 0.5) and np.any(p1 < 0.5):
        ax.contour(spec.xs, spec.ys, p1, levels=[0.5], colors="black", linewidths=1.0)
    _scatter_classes(ax, ds)
    fig.colorbar(mesh, ax=ax, label="P(class 1)")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(title)
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def plot_boundary_grid(
    grid: BoundaryGrid, ds: LabeledDataset, path: str | Path, *, title: str = ""
) -> None:
    """Oracle boundary grid; cells where the oracle is undefined stay blank."""
    plot_probability_map(grid.probs, grid.spec, ds, path, title=title)


def plot_training_curves(
    curves: Mapping[str, tuple[NDArray[np.float64], NDArray[np.float64]]],
    path: str | Path,
    *,
    ylabel: str = "training error",
    title: str = "",
) -> None:
    """Mean curves with a one-standard-deviation band, one line per label."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for label in sorted(curves):
        mean, sd = curves[label]
        epochs = np.arange(1, mean.size + 1)
        (line,) = ax.plot(epochs, mean, label=label, linewidth=1.2)
        ax.fill_between(epochs, mean - sd, mean + sd, color=line.get_color(), alpha=0.2)
    ax.set_xlabel("epoch")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)
