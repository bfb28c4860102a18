"""File-output figure rendering for harness results: ratio histograms,
the direction-count scaling plot, and maximal-field heatmaps. Every
number shown is read from, or re-derived identically to, the report
data; nothing numeric originates here."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .grids import Grid2D, format_number


def ratio_histogram(ratios, path, title: str = "ratio distribution") -> None:
    ratios = list(ratios)
    vals = [r for r in ratios if math.isfinite(r)]
    dropped = len(ratios) - len(vals)
    fig, ax = plt.subplots(figsize=(6, 4))
    if vals:
        ax.hist(vals, bins=min(50, max(5, len(vals) // 10)), color="#4878a8")
        ax.axvline(max(vals), color="#a84848", linestyle="--",
                   label=f"worst={format_number(max(vals))}")
        ax.legend()
    ax.set_xlabel("lhs/rhs")
    ax.set_ylabel("trials")
    note = f" ({dropped} non-finite omitted)" if dropped else ""
    ax.set_title(title + note)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def sweep_figure(sweep_doc: dict, path) -> None:
    """Scatter of squared worst ratio against log N with the stored
    least-squares line; the slope annotation repeats the stored value."""
    points = sorted(sweep_doc["points"], key=lambda p: p["N"])
    x = np.array([math.log(p["N"]) for p in points])
    y = np.array([p["worst_ratio_sq"] for p in points])
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.scatter(x, y, color="#4878a8", zorder=3)
    for p, xi, yi in zip(points, x, y):
        ax.annotate(f"N={p['N']}", (xi, yi), textcoords="offset points",
                    xytext=(4, 4), fontsize=8)
    slope = sweep_doc.get("slope")
    if slope is not None:
        intercept = sweep_doc["intercept"]
        xs = np.linspace(x.min(), x.max(), 50)
        ax.plot(xs, slope * xs + intercept, color="#a84848",
                label=f"slope={format_number(slope)}")
        ax.legend()
    ax.set_xlabel("log N")
    ax.set_ylabel("worst ratio squared")
    ax.set_title("weak-type ratio growth in the direction count")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def field_heatmap(grid: Grid2D, path, title: str = "field") -> None:
    cells = np.asarray(grid.cells, dtype=np.float64)
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    im = ax.imshow(cells, origin="lower", cmap="viridis",
                   extent=(0, grid.side, 0, grid.side))
    fig.colorbar(im, ax=ax)
    ax.set_title(title)
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
