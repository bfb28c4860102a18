"""Hardy-Littlewood, strong, and directional maximal operators on grids.

Cell convention: the value of a maximal field at a cell is the max of
averages over basis elements containing the cell's center. For the
axis-parallel operators the basis is all integer-aligned squares or
rectangles inside the grid; for nonnegative data a placement overhanging
the boundary never beats the flush one, so nothing is lost. The
directional basis is a finite (direction, scale, translation) lattice of
rotated rectangles and is a documented lower approximation of the
continuous sup.

Two numeric backends: float64, and an exact one for integer or Fraction
grids that carries (numerator, denominator) pairs and compares candidates
by cross-multiplication, returning Fraction-valued grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import sparse

from .grids import (
    GeometryError,
    Grid2D,
    SummedAreaTable,
    format_number,
    write_grid_csv,
)
from .rotated import RotatedRect, _clip_batch, _shoelace_batch

QUARTER = math.pi / 4.0

_to_fraction = np.frompyfunc(lambda a, b: Fraction(int(a), int(b)), 2, 1)


@dataclass(frozen=True)
class MaximalField:
    """A computed maximal function: operator tag plus the value grid."""

    tag: str
    values: Grid2D
    params: dict = field(default_factory=dict)

    def save_csv(self, path) -> None:
        header = {"operator": self.tag}
        for k, v in sorted(self.params.items()):
            header[k] = v if isinstance(v, (int, str)) else format_number(v)
        write_grid_csv(self.values, path, header=header)


@dataclass(frozen=True, eq=False)
class DirectionSet:
    """N uniformly spread unit directions with an eight-sector partition."""

    n_directions: int

    def __post_init__(self):
        if self.n_directions <= 10:
            raise ValueError(f"need more than 10 directions, got {self.n_directions}")

    @property
    def angles(self) -> np.ndarray:
        n = self.n_directions
        return 2.0 * math.pi * np.arange(n) / n

    @property
    def vectors(self) -> np.ndarray:
        a = self.angles
        return np.column_stack([np.cos(a), np.sin(a)])

    @property
    def sectors(self) -> list[np.ndarray]:
        """Indices grouped into eight angular octants of diameter <= pi/4."""
        which = np.minimum((self.angles / QUARTER).astype(int), 7)
        return [np.flatnonzero(which == s) for s in range(8)]

    def sector_angles(self, sector: int) -> np.ndarray:
        return self.angles[self.sectors[sector]]


def dyadic_sides(n: int) -> list[int]:
    out = [1]
    while out[-1] < n:
        out.append(out[-1] * 2)
    return out


def _placement_max_1d(arr: np.ndarray, window: int, out_len: int, fill) -> np.ndarray:
    """Max over the trailing placement window along the last axis.

    arr[..., x0] describes a window anchored at x0 (0 <= x0 <= out_len -
    window); output[..., x] is the max over anchors covering x, that is
    x0 in [x - window + 1, x].
    """
    m = arr.shape[-1]
    shape = arr.shape[:-1] + (out_len + window - 1,)
    padded = np.full(shape, fill, dtype=arr.dtype)
    padded[..., window - 1 : window - 1 + m] = arr
    return sliding_window_view(padded, window, axis=-1).max(axis=-1)


def _placement_max_2d(box: np.ndarray, w: int, h: int, n: int, fill) -> np.ndarray:
    t = _placement_max_1d(box, w, n, fill)
    t = _placement_max_1d(np.swapaxes(t, 0, 1), h, n, fill)
    return np.swapaxes(t, 0, 1)


def _exact_setup(g: Grid2D) -> tuple[SummedAreaTable, bool]:
    """SAT for the exact path; falls back to objects if int64 could overflow."""
    cells = g.cells
    if cells.dtype == object:
        return SummedAreaTable(g), True
    if not np.issubdtype(cells.dtype, np.integer):
        raise ValueError("exact backend needs integer or Fraction cell values")
    total = int(cells.sum())
    n = g.side
    if total * n * n >= 2**62:
        return SummedAreaTable(Grid2D(cells.astype(object))), True
    return SummedAreaTable(g), False


def _accumulate_exact(num, den, cand_num, cand_den: int):
    if num is None:
        den_arr = np.full(cand_num.shape, cand_den, dtype=cand_num.dtype)
        return cand_num.copy(), den_arr
    upd = cand_num * den > num * cand_den
    num[upd] = cand_num[upd]
    den[upd] = cand_den
    return num, den


def _fraction_grid(num, den) -> Grid2D:
    return Grid2D(_to_fraction(num, den))


def hl_maximal(g: Grid2D, dyadic: bool = False, exact: bool | None = None) -> MaximalField:
    """Hardy-Littlewood maximal field over axis-parallel squares.

    With dyadic=True only grid-aligned squares of power-of-two side are
    used (each cell lies in exactly one square per scale).
    """
    n = g.side
    if exact is None:
        exact = g.is_exact
    sides = dyadic_sides(n) if dyadic else range(1, n + 1)
    tag = "HL-dyadic" if dyadic else "HL-axis"
    if not exact:
        sat = SummedAreaTable(Grid2D(np.asarray(g.cells, dtype=np.float64)))
        best = np.full((n, n), -np.inf)
        for s in sides:
            box = sat.box_sums(s, s)
            if dyadic:
                cand = np.repeat(np.repeat(box[::s, ::s], s, 0), s, 1)
            else:
                cand = _placement_max_2d(box, s, s, n, -np.inf)
            np.maximum(best, cand / float(s * s), out=best)
        return MaximalField(tag, Grid2D(best))
    sat, _ = _exact_setup(g)
    num = den = None
    for s in sides:
        box = sat.box_sums(s, s)
        if dyadic:
            cand = np.repeat(np.repeat(box[::s, ::s], s, 0), s, 1)
        else:
            cand = _placement_max_2d(box, s, s, n, -1)
        num, den = _accumulate_exact(num, den, cand, s * s)
    return MaximalField(tag, _fraction_grid(num, den))


def strong_maximal(g: Grid2D, exact: bool | None = None) -> MaximalField:
    """Strong maximal field over all axis-parallel cell rectangles."""
    n = g.side
    if exact is None:
        exact = g.is_exact
    if not exact:
        sat = SummedAreaTable(Grid2D(np.asarray(g.cells, dtype=np.float64)))
        best = np.full((n, n), -np.inf)
        for h in range(1, n + 1):
            for w in range(1, n + 1):
                cand = _placement_max_2d(sat.box_sums(w, h), w, h, n, -np.inf)
                np.maximum(best, cand / float(w * h), out=best)
        return MaximalField("strong", Grid2D(best))
    sat, _ = _exact_setup(g)
    num = den = None
    for h in range(1, n + 1):
        for w in range(1, n + 1):
            cand = _placement_max_2d(sat.box_sums(w, h), w, h, n, -1)
            num, den = _accumulate_exact(num, den, cand, w * h)
    return MaximalField("strong", _fraction_grid(num, den))


def default_scale_grid(side: int) -> list[tuple[int, int]]:
    """(L, l) pairs: L runs over powers of two up to side, aspect ratios
    L/l over powers of two with the short side at least one cell."""
    pairs = []
    L = 2
    while L <= side:
        aspect = 2
        while aspect <= L:
            pairs.append((L, L // aspect))
            aspect *= 2
        L *= 2
    return pairs


class DirectionalEvaluator:
    """Precomputed rotated-rectangle family for directional maximal fields.

    One instance fixes (side, direction set, scale grid, refine) and can
    evaluate many grids cheaply: per-rectangle averages are a sparse
    matrix-vector product over precomputed cell-clip areas, and the field
    is a segmented max over rectangles containing each cell center.
    Antipodal directions index the same rectangles and are deduplicated.
    Translations lie on an absolute lattice in the rectangle's own axes
    with spacing (L/2, l/2) divided by refine.
    """

    def __init__(self, side: int, dirs: DirectionSet,
                 scale_grid: list[tuple[float, float]] | None = None,
                 refine: int = 1):
        if scale_grid is None:
            scale_grid = default_scale_grid(side)
        for L, ell in scale_grid:
            if ell > L:
                raise GeometryError(f"scale pair has short side {ell} > long side {L}")
            if ell <= 0:
                raise GeometryError(f"scale pair has nonpositive side {ell}")
        self.side = side
        self.dirs = dirs
        self.scale_grid = list(scale_grid)
        self.refine = refine
        self._build()

    def _orientations(self) -> np.ndarray:
        mod = np.mod(self.dirs.angles, math.pi)
        return np.unique(np.round(mod, 12))

    def _build(self) -> None:
        n = self.side
        tol = 1e-9
        corners = np.array([[0.0, 0.0], [n, 0.0], [0.0, n], [n, n]])
        pair_rect: list[np.ndarray] = []
        pair_cell: list[np.ndarray] = []
        pair_weight: list[np.ndarray] = []
        cover_rect: list[np.ndarray] = []
        cover_cell: list[np.ndarray] = []
        rect_total = 0

        for theta in self._orientations():
            u = np.array([math.cos(theta), math.sin(theta)])
            v = np.array([-u[1], u[0]])
            pu = corners @ u
            qv = corners @ v
            for L, ell in self.scale_grid:
                step_p = L / (2.0 * self.refine)
                step_q = ell / (2.0 * self.refine)
                kp0 = math.ceil((pu.min() - L / 2.0) / step_p - 1e-9)
                kp1 = math.floor((pu.max() + L / 2.0) / step_p + 1e-9)
                kq0 = math.ceil((qv.min() - ell / 2.0) / step_q - 1e-9)
                kq1 = math.floor((qv.max() + ell / 2.0) / step_q + 1e-9)
                ps = np.arange(kp0, kp1 + 1) * step_p
                qs = np.arange(kq0, kq1 + 1) * step_q
                cen = (ps[:, None, None] * u + qs[None, :, None] * v).reshape(-1, 2)

                ex = (L * abs(u[0]) + ell * abs(v[0])) / 2.0
                ey = (L * abs(u[1]) + ell * abs(v[1])) / 2.0
                inside_box = (
                    (cen[:, 0] > -ex) & (cen[:, 0] < n + ex)
                    & (cen[:, 1] > -ey) & (cen[:, 1] < n + ey)
                )
                cen = cen[inside_box]
                if cen.shape[0] == 0:
                    continue

                kx = int(math.floor(2.0 * ex)) + 2
                ky = int(math.floor(2.0 * ey)) + 2
                xb = np.floor(cen[:, 0] - ex).astype(np.int64)
                yb = np.floor(cen[:, 1] - ey).astype(np.int64)
                ox, oy = np.meshgrid(np.arange(kx), np.arange(ky), indexing="ij")
                cx = xb[:, None] + ox.ravel()[None, :]
                cy = yb[:, None] + oy.ravel()[None, :]
                valid = (cx >= 0) & (cx < n) & (cy >= 0) & (cy < n)

                ccx = cx + 0.5
                ccy = cy + 0.5
                du = (ccx - cen[:, 0:1]) * u[0] + (ccy - cen[:, 1:2]) * u[1]
                dv = (ccx - cen[:, 0:1]) * v[0] + (ccy - cen[:, 1:2]) * v[1]
                covered = valid & (np.abs(du) <= L / 2.0 + tol) & (np.abs(dv) <= ell / 2.0 + tol)
                keep = covered.any(axis=1)
                if not keep.any():
                    continue
                cen, cx, cy, valid, covered = (
                    cen[keep], cx[keep], cy[keep], valid[keep], covered[keep])
                nrect = cen.shape[0]
                rect_ids = rect_total + np.arange(nrect)
                rect_total += nrect

                ri, ci = np.nonzero(covered)
                cover_rect.append(rect_ids[ri])
                cover_cell.append(cy[ri, ci] * n + cx[ri, ci])

                ri, ci = np.nonzero(valid)
                k = ri.shape[0]
                square = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
                verts = np.empty((k, 4, 2))
                verts[:, :, 0] = cx[ri, ci][:, None] + square[None, :, 0]
                verts[:, :, 1] = cy[ri, ci][:, None] + square[None, :, 1]
                count = np.full(k, 4, dtype=np.int64)
                half = (L / 2.0, L / 2.0, ell / 2.0, ell / 2.0)
                for (nx, ny), hl in zip((u, -u, v, -v), half):
                    d = cen[ri] @ np.array([nx, ny]) + hl
                    verts, count = _clip_batch(verts, count, nx, ny, d)
                areas = _shoelace_batch(verts, count)
                pos = areas > 1e-12
                pair_rect.append(rect_ids[ri[pos]])
                pair_cell.append(cy[ri, ci][pos] * n + cx[ri, ci][pos])
                pair_weight.append(areas[pos] / (L * ell))

        self.rect_count = rect_total
        if rect_total == 0:
            raise GeometryError("empty rectangle family; scale grid too coarse")
        rows = np.concatenate(pair_rect)
        cols = np.concatenate(pair_cell)
        wts = np.concatenate(pair_weight)
        self.matrix = sparse.csr_matrix(
            (wts, (rows, cols)), shape=(rect_total, n * n))
        crect = np.concatenate(cover_rect)
        ccell = np.concatenate(cover_cell)
        order = np.lexsort((crect, ccell))
        self._cover_rect = crect[order]
        cells_sorted = ccell[order]
        self._seg_cells, self._seg_starts = np.unique(cells_sorted, return_index=True)

    def averages(self, grids: list[Grid2D]) -> np.ndarray:
        """(rect_count, len(grids)) array of area-weighted averages."""
        flat = np.column_stack(
            [np.asarray(g.cells, dtype=np.float64).ravel() for g in grids])
        return self.matrix @ flat

    def evaluate(self, grids: list[Grid2D]) -> list[Grid2D]:
        """Directional maximal fields for several grids in one pass."""
        avgs = self.averages(grids)
        cand = avgs[self._cover_rect, :]
        seg_max = np.maximum.reduceat(cand, self._seg_starts, axis=0)
        out = []
        for j, g in enumerate(grids):
            flat = np.asarray(g.cells, dtype=np.float64).ravel().copy()
            flat[self._seg_cells] = np.maximum(flat[self._seg_cells], seg_max[:, j])
            out.append(Grid2D(flat.reshape(self.side, self.side)))
        return out


def directional_maximal(g: Grid2D, dirs: DirectionSet,
                        scale_grid: list[tuple[float, float]] | None = None,
                        evaluator: DirectionalEvaluator | None = None) -> MaximalField:
    """Directional maximal field; a lower approximation of the continuous
    sup, discretized over (direction, scale, translation) and floored at
    each cell's own value."""
    if evaluator is None:
        evaluator = DirectionalEvaluator(g.side, dirs, scale_grid)
    values = evaluator.evaluate([g])[0]
    return MaximalField(
        "directional", values,
        {"N": evaluator.dirs.n_directions,
         "scale_grid": tuple(map(tuple, evaluator.scale_grid)),
         "refine": evaluator.refine})


def compose_W(w: Grid2D, dirs: DirectionSet | None = None,
              evaluator: DirectionalEvaluator | None = None) -> MaximalField:
    """W = M_strong(M_HL w), or M_directional(M_HL w) when directions are
    given. The inner operator is the non-dyadic axis-parallel one."""
    inner = hl_maximal(w, exact=False).values
    if dirs is None and evaluator is None:
        outer = strong_maximal(inner, exact=False)
        return MaximalField("composed-W", outer.values, {"outer": "strong"})
    if evaluator is None:
        evaluator = DirectionalEvaluator(w.side, dirs)
    values = evaluator.evaluate([inner])[0]
    return MaximalField(
        "composed-W", values,
        {"outer": "directional", "N": evaluator.dirs.n_directions})
