"""Brute-force reference implementations of the maximal operators.

These deliberately avoid the summed-area-table and sliding-window machinery
of the fast paths: every basis element is enumerated, its integral taken by
direct cell summation, and its average pushed to the covered cells one
rectangle at a time. Exact (Fraction) results for integer or Fraction
grids; used only at small sides.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .grids import Grid2D
from .maximal import DirectionSet, dyadic_sides
from .rotated import RotatedRect, integrate_rotated


def _exact_state(g: Grid2D):
    cells = g.cells
    n = g.side
    if cells.dtype == object:
        num = np.array([[Fraction(v) for v in row] for row in cells], dtype=object)
        den = np.ones((n, n), dtype=object)
        return cells, num, den
    if not np.issubdtype(cells.dtype, np.integer):
        raise ValueError("reference oracles need integer or Fraction grids")
    total = int(cells.sum())
    if total * n * n >= 2**62:
        cells = cells.astype(object)
        num = cells.copy()
        den = np.ones((n, n), dtype=object)
        return cells, num, den
    return cells, cells.astype(np.int64).copy(), np.ones((n, n), dtype=np.int64)


def _push_rect(cells, num, den, x0, y0, w, h):
    total = cells[y0 : y0 + h, x0 : x0 + w].sum()
    area = w * h
    sub_n = num[y0 : y0 + h, x0 : x0 + w]
    sub_d = den[y0 : y0 + h, x0 : x0 + w]
    upd = total * sub_d > sub_n * area
    sub_n[upd] = total
    sub_d[upd] = area


def _finish(num, den) -> Grid2D:
    out = np.empty(num.shape, dtype=object)
    fn, fd, fo = num.ravel(), den.ravel(), out.ravel()
    for i in range(fo.size):
        a = fn[i]
        if not isinstance(a, Fraction):
            a = Fraction(int(a))
        fo[i] = a / int(fd[i])
    return Grid2D(out)


def reference_hl(g: Grid2D, dyadic: bool = False) -> Grid2D:
    """Per-square enumeration oracle for the Hardy-Littlewood field."""
    n = g.side
    cells, num, den = _exact_state(g)
    if dyadic:
        for s in dyadic_sides(n):
            for y0 in range(0, n, s):
                for x0 in range(0, n, s):
                    _push_rect(cells, num, den, x0, y0, s, s)
    else:
        for s in range(1, n + 1):
            for y0 in range(n - s + 1):
                for x0 in range(n - s + 1):
                    _push_rect(cells, num, den, x0, y0, s, s)
    return _finish(num, den)


def reference_strong(g: Grid2D) -> Grid2D:
    """All-rectangle enumeration oracle for the strong maximal field."""
    n = g.side
    cells, num, den = _exact_state(g)
    for h in range(1, n + 1):
        for w in range(1, n + 1):
            for y0 in range(n - h + 1):
                for x0 in range(n - w + 1):
                    _push_rect(cells, num, den, x0, y0, w, h)
    return _finish(num, den)


def reference_directional(g: Grid2D, dirs: DirectionSet,
                          scale_grid: list[tuple[float, float]],
                          refine: int = 1) -> Grid2D:
    """Scalar-loop directional field over the same absolute translation
    lattice as the fast evaluator, refined by the given factor. Uses the
    scalar polygon clipper throughout."""
    n = g.side
    corners = np.array([[0.0, 0.0], [n, 0.0], [0.0, n], [n, n]])
    centers = np.indices((n, n)).astype(np.float64) + 0.5  # [yx, row, col]
    pts = np.column_stack([centers[1].ravel(), centers[0].ravel()])
    best = np.asarray(g.cells, dtype=np.float64).ravel().copy()

    angles = sorted({round(a % math.pi, 12) for a in dirs.angles})
    for theta in angles:
        u = np.array([math.cos(theta), math.sin(theta)])
        v = np.array([-u[1], u[0]])
        pu = corners @ u
        qv = corners @ v
        for L, ell in scale_grid:
            step_p = L / (2.0 * refine)
            step_q = ell / (2.0 * refine)
            kp = range(math.ceil((pu.min() - L / 2) / step_p - 1e-9),
                       math.floor((pu.max() + L / 2) / step_p + 1e-9) + 1)
            kq = range(math.ceil((qv.min() - ell / 2) / step_q - 1e-9),
                       math.floor((qv.max() + ell / 2) / step_q + 1e-9) + 1)
            for i in kp:
                for j in kq:
                    c = i * step_p * u + j * step_q * v
                    rect = RotatedRect((c[0], c[1]), L, ell, theta)
                    cover = rect.contains_points(pts)
                    if not cover.any():
                        continue
                    avg = integrate_rotated(g, rect) / rect.area
                    np.maximum(best, np.where(cover, avg, -np.inf), out=best)
    return Grid2D(best.reshape(n, n))
