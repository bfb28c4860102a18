"""Rotated rectangles and exact polygon-clipping integration.

Two clipping routes are kept deliberately separate: a scalar Sutherland-
Hodgman clipper used by `integrate_rotated` and the covering checkers, and a
batched array clipper (`unit_cell_overlap`) used by the directional maximal
field evaluator. Each serves as a cross-check on the other in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grids import GeometryError, Grid2D

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class RotatedRect:
    """Rectangle with center, longer side `length`, shorter side `width`,
    and angle `theta` of the longer side to the x1-axis."""

    center: tuple[float, float]
    length: float
    width: float
    theta: float

    def __post_init__(self):
        if not (self.length > 0 and self.width > 0):
            raise GeometryError(f"rectangle sides must be positive, got {self}")
        if self.width > self.length * (1 + 1e-12):
            raise GeometryError(
                f"width {self.width} exceeds length {self.length}; "
                "the longer side defines the direction"
            )
        object.__setattr__(self, "theta", self.theta % TWO_PI)

    @property
    def area(self) -> float:
        return self.length * self.width

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        """Unit vectors along the longer and shorter sides."""
        u = np.array([math.cos(self.theta), math.sin(self.theta)])
        v = np.array([-u[1], u[0]])
        return u, v

    def corners(self) -> np.ndarray:
        """(4, 2) corner array in counterclockwise order."""
        c = np.asarray(self.center, dtype=np.float64)
        u, v = self.axes()
        hu, hv = u * (self.length / 2.0), v * (self.width / 2.0)
        return np.array([c + hu + hv, c - hu + hv, c - hu - hv, c + hu - hv])

    def half_planes(self) -> tuple[np.ndarray, np.ndarray]:
        """Normals (4, 2) and offsets (4,) with inside = {n.x <= d}."""
        c = np.asarray(self.center, dtype=np.float64)
        u, v = self.axes()
        normals = np.array([u, -u, v, -v])
        half = np.array([self.length / 2.0, self.length / 2.0,
                         self.width / 2.0, self.width / 2.0])
        offsets = normals @ c + half
        return normals, offsets

    def contains_points(self, pts: np.ndarray) -> np.ndarray:
        """Boolean mask of points inside (boundary included)."""
        pts = np.atleast_2d(pts)
        d = pts - np.asarray(self.center)
        u, v = self.axes()
        return (np.abs(d @ u) <= self.length / 2.0 + 1e-12) & (
            np.abs(d @ v) <= self.width / 2.0 + 1e-12
        )

    def bounding_box(self) -> tuple[float, float, float, float]:
        cs = self.corners()
        return cs[:, 0].min(), cs[:, 0].max(), cs[:, 1].min(), cs[:, 1].max()

    def expanded(self, factor: float) -> "RotatedRect":
        if factor < 1:
            raise GeometryError(f"expansion factor must be >= 1, got {factor}")
        return RotatedRect(self.center, self.length * factor,
                           self.width * factor, self.theta)


def angular_distance(a: float, b: float) -> float:
    """Distance between two angles on the circle, in [0, pi]."""
    d = abs(a - b) % TWO_PI
    return min(d, TWO_PI - d)


# --- scalar clipping -------------------------------------------------------

def clip_halfplane(poly: list, nx: float, ny: float, d: float) -> list:
    """Keep the part of a convex polygon with nx*x + ny*y <= d."""
    if not poly:
        return []
    out = []
    m = len(poly)
    for i in range(m):
        px, py = poly[i]
        qx, qy = poly[(i + 1) % m]
        pin = nx * px + ny * py <= d
        qin = nx * qx + ny * qy <= d
        if pin:
            out.append((px, py))
        if pin != qin:
            dp = nx * px + ny * py - d
            dq = nx * qx + ny * qy - d
            t = dp / (dp - dq)
            out.append((px + t * (qx - px), py + t * (qy - py)))
    return out


def polygon_area(poly) -> float:
    """Shoelace area of a convex polygon given as vertex pairs."""
    m = len(poly)
    if m < 3:
        return 0.0
    s = 0.0
    for i in range(m):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % m]
        s += x0 * y1 - x1 * y0
    return abs(s) / 2.0


def clip_rect_to_box(r: RotatedRect, x0: float, x1: float, y0: float, y1: float) -> list:
    poly = [tuple(p) for p in r.corners()]
    poly = clip_halfplane(poly, -1.0, 0.0, -x0)
    poly = clip_halfplane(poly, 1.0, 0.0, x1)
    poly = clip_halfplane(poly, 0.0, -1.0, -y0)
    poly = clip_halfplane(poly, 0.0, 1.0, y1)
    return poly


def intersection_area(a: RotatedRect, b: RotatedRect) -> float:
    """Exact area of the intersection of two rotated rectangles."""
    poly = [tuple(p) for p in a.corners()]
    normals, offsets = b.half_planes()
    for (nx, ny), d in zip(normals, offsets):
        poly = clip_halfplane(poly, nx, ny, d)
        if not poly:
            return 0.0
    return polygon_area(poly)


def integrate_rotated(g: Grid2D, r: RotatedRect) -> float:
    """Exact area-weighted integral of g over r.

    Sum over cells of value * area(cell intersect r); cells outside the grid
    contribute zero (zero extension of g). The rectangle is clipped row strip
    by row strip, then cell by cell.
    """
    n = g.side
    bx0, bx1, by0, by1 = r.bounding_box()
    ya, yb = max(0, math.floor(by0)), min(n, math.ceil(by1))
    xa, xb = max(0, math.floor(bx0)), min(n, math.ceil(bx1))
    if ya >= yb or xa >= xb:
        return 0.0
    cells = np.asarray(g.cells, dtype=np.float64)
    corners = [tuple(p) for p in r.corners()]
    total = 0.0
    for y in range(ya, yb):
        strip = clip_halfplane(corners, 0.0, -1.0, -float(y))
        strip = clip_halfplane(strip, 0.0, 1.0, float(y + 1))
        if not strip:
            continue
        for x in range(xa, xb):
            if cells[y, x] == 0.0:
                continue
            poly = clip_halfplane(strip, -1.0, 0.0, -float(x))
            poly = clip_halfplane(poly, 1.0, 0.0, float(x + 1))
            a = polygon_area(poly)
            if a > 0.0:
                total += cells[y, x] * a
    return total


def average_rotated(g: Grid2D, r: RotatedRect) -> float:
    """Integral average over the full rectangle area (zero extension)."""
    return integrate_rotated(g, r) / r.area


# --- batched clipping ------------------------------------------------------

def _clip_batch(verts: np.ndarray, count: np.ndarray,
                nx: float, ny: float, d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """One half-plane pass of Sutherland-Hodgman over K padded polygons.

    verts: (K, V, 2), count: (K,) valid vertex counts, inside = nx*x+ny*y <= d
    with d broadcastable to (K,). Returns new (verts, count) with V+1 slots.
    """
    K, V, _ = verts.shape
    idx = np.arange(V)
    valid = idx[None, :] < count[:, None]
    dist = verts[:, :, 0] * nx + verts[:, :, 1] * ny - np.asarray(d).reshape(-1, 1)
    inside = (dist <= 0.0) & valid

    nxt = idx + 1
    nxt = np.where(nxt[None, :] >= count[:, None], 0, nxt[None, :])
    vnext = np.take_along_axis(verts, nxt[:, :, None], axis=1)
    dnext = np.take_along_axis(dist, nxt, axis=1)
    inext = np.take_along_axis(inside, nxt, axis=1)

    cross = (inside != inext) & valid
    emit_cross = cross
    emit_next = inext & valid
    n_emit = emit_cross.astype(np.int64) + emit_next.astype(np.int64)
    pos = np.cumsum(n_emit, axis=1) - n_emit
    new_count = n_emit.sum(axis=1)

    with np.errstate(divide="ignore", invalid="ignore"):
        t = dist / (dist - dnext)
    t = np.where(cross, t, 0.0)
    pcross = verts + t[:, :, None] * (vnext - verts)

    out = np.zeros((K, V + 1, 2), dtype=np.float64)
    rows = np.broadcast_to(np.arange(K)[:, None], (K, V))
    # crossing point goes first, then the next vertex if it is inside
    out[rows[emit_cross], pos[emit_cross]] = pcross[emit_cross]
    pos_next = pos + emit_cross.astype(np.int64)
    out[rows[emit_next], pos_next[emit_next]] = vnext[emit_next]
    return out, new_count


def _shoelace_batch(verts: np.ndarray, count: np.ndarray) -> np.ndarray:
    K, V, _ = verts.shape
    idx = np.arange(V)
    valid = idx[None, :] < count[:, None]
    nxt = np.where(idx[None, :] + 1 >= count[:, None], 0, idx[None, :] + 1)
    vnext = np.take_along_axis(verts, nxt[:, :, None], axis=1)
    cross = verts[:, :, 0] * vnext[:, :, 1] - vnext[:, :, 0] * verts[:, :, 1]
    s = np.where(valid & (count[:, None] >= 3), cross, 0.0).sum(axis=1)
    return np.abs(s) / 2.0


def unit_cell_overlap(rect: RotatedRect, cell_xy: np.ndarray) -> np.ndarray:
    """Overlap areas of one rotated rectangle with K unit cells.

    cell_xy: (K, 2) integer cell origins. Returns (K,) areas, computed by
    clipping each unit square against the rectangle's four half-planes.
    """
    cell_xy = np.atleast_2d(cell_xy).astype(np.float64)
    K = cell_xy.shape[0]
    if K == 0:
        return np.zeros(0)
    square = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    verts = cell_xy[:, None, :] + square[None, :, :]
    count = np.full(K, 4, dtype=np.int64)
    normals, offsets = rect.half_planes()
    for (nx, ny), d in zip(normals, offsets):
        verts, count = _clip_batch(verts, count, nx, ny, np.full(K, d))
        if not count.any():
            return np.zeros(K)
    return _shoelace_batch(verts, count)
