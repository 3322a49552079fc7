"""Matplotlib rendering of metric curves to image files.

Everything here draws on the Agg backend and writes PNG files next to the
delimited curve output; nothing opens a window. Axes follow the curve
conventions of :mod:`upliftkit.metrics`: the x axis is the targeted
fraction of the ranked population.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .metrics import MetricsReport


def save_curve_figures(
    report: MetricsReport,
    out_dir: str | Path,
    label: str = "model",
) -> tuple[Path, Path]:
    """Render a report's qini and uplift curves as ``qini.png``/``uplift.png``.

    The qini figure includes the random-ranking diagonal from the origin
    to the curve endpoint; the uplift figure includes the zero line.

    Args:
        report: Metrics to draw.
        out_dir: Directory receiving the two files; must exist.
        label: Legend name for the scored ranking.

    Returns:
        Paths of the written qini and uplift figures.
    """
    out_dir = Path(out_dir)
    qini_path = out_dir / "qini.png"
    uplift_path = out_dir / "uplift.png"

    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    ax.plot(report.fractions, report.qini_values, label=label, color="tab:blue")
    endpoint = report.qini_values[-1]
    ax.plot(
        [0.0, 1.0],
        [0.0, endpoint],
        linestyle="--",
        color="tab:gray",
        label="random",
    )
    ax.set_xlabel("targeted fraction")
    ax.set_ylabel("incremental positives")
    ax.set_title(f"qini curve (coefficient {report.qini_coefficient:.4f})")
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(qini_path)
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    ax.plot(report.fractions, report.uplift_values, label=label, color="tab:green")
    ax.axhline(0.0, linestyle="--", color="tab:gray", linewidth=1.0)
    ax.set_xlabel("targeted fraction")
    ax.set_ylabel("cumulative uplift")
    ax.set_title(f"uplift curve (AUUC {report.auuc:.6f})")
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(uplift_path)
    plt.close(fig)

    return qini_path, uplift_path


def save_comparison_figure(
    fractions: np.ndarray,
    curves: dict[str, np.ndarray],
    path: str | Path,
    ylabel: str = "incremental positives",
) -> Path:
    """Overlay one curve per approach in a single figure.

    Args:
        fractions: Shared x grid.
        curves: Approach name to curve values, drawn in iteration order.
        path: Output PNG path.
        ylabel: Y-axis label; the x axis is always the targeted fraction.

    Returns:
        The written path.
    """
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    for name, values in curves.items():
        ax.plot(fractions, values, label=name)
    ax.set_xlabel("targeted fraction")
    ax.set_ylabel(ylabel)
    ax.set_title("approach comparison")
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path
