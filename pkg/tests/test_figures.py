"""Figure rendering: files exist and carry sane image payloads."""

import math

import numpy as np

from maxlab.experiments import sweep_directions
from maxlab.figures import field_heatmap, ratio_histogram, sweep_figure
from maxlab.grids import Grid2D


def _is_png(path) -> bool:
    return path.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_ratio_histogram_handles_nonfinite(tmp_path):
    path = tmp_path / "hist.png"
    ratio_histogram([0.1, 0.5, 0.4, math.inf], path, "demo")
    assert _is_png(path)


def test_sweep_figure_from_doc(tmp_path):
    doc = sweep_directions(Ns=(16, 32), trials=2, side=8, seed=1).to_json_dict()
    path = tmp_path / "sweep.png"
    sweep_figure(doc, path)
    assert _is_png(path)


def test_field_heatmap(tmp_path):
    g = Grid2D(np.arange(64, dtype=np.float64).reshape(8, 8))
    path = tmp_path / "heat.png"
    field_heatmap(g, path, "field")
    assert _is_png(path)
