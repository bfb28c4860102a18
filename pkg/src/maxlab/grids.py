"""Discrete 2D domain: power-of-two grids, dyadic structure, axis-parallel
rectangles, and exact integration primitives.

Functions and weights are piecewise constant on unit cells and extended by
zero outside the grid, so every axis-parallel integral is a finite cell sum
and is exact whenever the cell values are integers or rationals.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class BoundsError(ValueError):
    """Rectangle is not contained in the grid."""


class GeometryError(ValueError):
    """Degenerate or inconsistent rectangle geometry."""


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True, eq=False)
class Grid2D:
    """Nonnegative values on an n x n unit-cell grid, n a power of two.

    ``cells[y, x]`` is the value on the cell [x, x+1) x [y, y+1), origin at
    (0, 0). Cell dtype may be float64 (double backend), an integer dtype, or
    object holding ints/Fractions (exact backend).
    """

    cells: np.ndarray

    def __post_init__(self):
        cells = np.asarray(self.cells)
        if cells.ndim != 2 or cells.shape[0] != cells.shape[1]:
            raise ValueError(f"cells must be a square array, got shape {cells.shape}")
        if not is_power_of_two(cells.shape[0]):
            raise ValueError(f"grid side must be a power of two, got {cells.shape[0]}")
        if cells.dtype == object:
            if any(v < 0 for v in cells.flat):
                raise ValueError("cell values must be nonnegative")
        else:
            if not np.all(np.isfinite(cells)):
                raise ValueError("cell values must be finite")
            if cells.min(initial=0) < 0:
                raise ValueError("cell values must be nonnegative")
        object.__setattr__(self, "cells", cells)

    @property
    def side(self) -> int:
        return self.cells.shape[0]

    @property
    def is_exact(self) -> bool:
        return self.cells.dtype != np.float64

    def total(self):
        return self.cells.sum()

    def scaled(self, c) -> "Grid2D":
        if c < 0:
            raise ValueError("scale factor must be nonnegative")
        return Grid2D(self.cells * c)

    @classmethod
    def constant(cls, side: int, value=1.0) -> "Grid2D":
        return cls(np.full((side, side), value, dtype=np.float64))

    @classmethod
    def zeros(cls, side: int) -> "Grid2D":
        return cls(np.zeros((side, side)))


@dataclass(frozen=True)
class DyadicInterval:
    """Half-open dyadic interval [index * 2^level, (index + 1) * 2^level)."""

    level: int
    index: int

    def __post_init__(self):
        if self.level < 0:
            raise ValueError(f"level must be >= 0, got {self.level}")
        if self.index < 0:
            raise ValueError(f"index must be >= 0, got {self.index}")

    @property
    def start(self) -> int:
        return self.index << self.level

    @property
    def stop(self) -> int:
        return (self.index + 1) << self.level

    @property
    def length(self) -> int:
        return 1 << self.level

    def contains(self, other: "DyadicInterval") -> bool:
        return self.start <= other.start and other.stop <= self.stop

    def intersect(self, other: "DyadicInterval") -> "DyadicInterval | None":
        """Dyadic trichotomy: the intersection is the smaller interval or empty."""
        if self.contains(other):
            return other
        if other.contains(self):
            return self
        return None


def dyadic_intervals(side: int) -> list[DyadicInterval]:
    """All dyadic subintervals of [0, side), coarse levels last."""
    if not is_power_of_two(side):
        raise ValueError(f"side must be a power of two, got {side}")
    out = []
    level = 0
    while (1 << level) <= side:
        out.extend(DyadicInterval(level, j) for j in range(side >> level))
        level += 1
    return out


@dataclass(frozen=True)
class DyadicRect:
    """Cartesian product of two dyadic intervals (x1-axis times x2-axis)."""

    ix: DyadicInterval
    iy: DyadicInterval

    @property
    def len_x(self) -> int:
        """|P1(R)|, the x1-projection length."""
        return self.ix.length

    @property
    def len_y(self) -> int:
        """|P2(R)|, the x2-projection length."""
        return self.iy.length

    @property
    def area(self) -> int:
        return self.len_x * self.len_y

    @property
    def long_side_x1(self) -> bool:
        return self.len_x >= self.len_y

    def as_axis_rect(self) -> "AxisRect":
        return AxisRect(self.ix.start, self.ix.stop, self.iy.start, self.iy.stop)

    def intersect(self, other: "DyadicRect") -> "DyadicRect | None":
        ix = self.ix.intersect(other.ix)
        iy = self.iy.intersect(other.iy)
        if ix is None or iy is None:
            return None
        return DyadicRect(ix, iy)


@dataclass(frozen=True)
class AxisRect:
    """Half-open axis-parallel cell rectangle [x0, x1) x [y0, y1)."""

    x0: int
    x1: int
    y0: int
    y1: int

    def __post_init__(self):
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise GeometryError(f"empty axis rectangle {self}")

    @property
    def width(self) -> int:
        return self.x1 - self.x0

    @property
    def height(self) -> int:
        return self.y1 - self.y0

    @property
    def area(self) -> int:
        return self.width * self.height

    def contains_cell(self, x: int, y: int) -> bool:
        return self.x0 <= x < self.x1 and self.y0 <= y < self.y1


def _check_bounds(g: Grid2D, r: AxisRect) -> None:
    if r.x0 < 0 or r.y0 < 0 or r.x1 > g.side or r.y1 > g.side:
        raise BoundsError(f"{r} exceeds grid of side {g.side}")


class SummedAreaTable:
    """Prefix sums over a grid; O(1) integrals of axis rectangles.

    Exact for integer and object (rational) grids; float grids accumulate in
    float64.
    """

    def __init__(self, g: Grid2D):
        cells = g.cells
        n = g.side
        if cells.dtype == object:
            prefix = np.zeros((n + 1, n + 1), dtype=object)
        elif np.issubdtype(cells.dtype, np.integer):
            prefix = np.zeros((n + 1, n + 1), dtype=np.int64)
        else:
            prefix = np.zeros((n + 1, n + 1), dtype=np.float64)
        prefix[1:, 1:] = cells.cumsum(axis=0).cumsum(axis=1)
        self.prefix = prefix
        self.side = n

    def rect_sum(self, r: AxisRect):
        if r.x0 < 0 or r.y0 < 0 or r.x1 > self.side or r.y1 > self.side:
            raise BoundsError(f"{r} exceeds grid of side {self.side}")
        p = self.prefix
        return p[r.y1, r.x1] - p[r.y1, r.x0] - p[r.y0, r.x1] + p[r.y0, r.x0]

    def box_sums(self, w: int, h: int) -> np.ndarray:
        """Sums of all w x h boxes; entry [y0, x0] is the box at that corner."""
        p = self.prefix
        return p[h:, w:] - p[h:, :-w] - p[:-h, w:] + p[:-h, :-w]


def integrate(g: Grid2D, r: AxisRect):
    """Unnormalized integral of g over r (sum of cell values)."""
    _check_bounds(g, r)
    return g.cells[r.y0 : r.y1, r.x0 : r.x1].sum()


def average(g: Grid2D, r: AxisRect):
    return integrate(g, r) / r.area


def enumerate_dyadic_rects(side: int, long_side_x1: bool = False) -> list[DyadicRect]:
    """Every dyadic rectangle in [0, side)^2, optionally only those with
    |P1| >= |P2|."""
    if not is_power_of_two(side):
        raise ValueError(f"side must be a power of two, got {side}")
    xs = dyadic_intervals(side)
    ys = dyadic_intervals(side)
    rects = (DyadicRect(ix, iy) for ix in xs for iy in ys)
    if long_side_x1:
        return [r for r in rects if r.long_side_x1]
    return list(rects)


# --- grid I/O -------------------------------------------------------------
#
# CSV: `side` rows of `side` comma-separated nonnegative decimals, row y=0
# first. Lines starting with '#' are metadata (`# key=value`) and skipped by
# the reader. JSON: {"side": n, "cells": [row-major]}.

def format_number(x) -> str:
    """12 significant digits, the project-wide printed precision."""
    return f"{float(x):.12g}"


def write_grid_csv(g: Grid2D, path, header: dict | None = None) -> None:
    lines = []
    if header:
        lines.extend(f"# {k}={v}" for k, v in header.items())
    for row in np.asarray(g.cells, dtype=np.float64):
        lines.append(",".join(format_number(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_grid_csv(path) -> tuple[Grid2D, dict]:
    header = {}
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line.lstrip("# ").partition("=")
            header[key.strip()] = value.strip()
            continue
        rows.append([float(tok) for tok in line.split(",")])
    if not rows:
        raise ValueError(f"no grid rows in {path}")
    return Grid2D(np.array(rows, dtype=np.float64)), header


def write_grid_json(g: Grid2D, path, extra: dict | None = None) -> None:
    doc = {"side": g.side, "cells": [float(v) for v in np.asarray(g.cells).ravel()]}
    if extra:
        doc.update(extra)
    Path(path).write_text(json.dumps(doc, sort_keys=True) + "\n")


def read_grid_json(path) -> Grid2D:
    doc = json.loads(Path(path).read_text())
    side = int(doc["side"])
    cells = np.array(doc["cells"], dtype=np.float64).reshape(side, side)
    return Grid2D(cells)
