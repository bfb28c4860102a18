"""Weights: constructors, weighted measures and norms, Muckenhoupt-type
rectangle constants, and the L(1+log+L) functional.

All logarithms are natural; reported constants absorb the base.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .grids import Grid2D, SummedAreaTable


def weighted_measure(w: Grid2D, level_set) -> float:
    """w(E) for E given as a boolean cell mask or a cell predicate
    pred(x, y) evaluated on integer cell coordinates."""
    cells = np.asarray(w.cells, dtype=np.float64)
    if callable(level_set):
        n = w.side
        mask = np.fromfunction(
            np.vectorize(lambda y, x: bool(level_set(int(x), int(y)))), (n, n), dtype=int)
    else:
        mask = np.asarray(level_set, dtype=bool)
        if mask.shape != cells.shape:
            raise ValueError(f"mask shape {mask.shape} != grid shape {cells.shape}")
    return float(cells[mask].sum())


def lp_norm(f: Grid2D, w: Grid2D, p: float) -> float:
    """(sum f^p w)^(1/p) over cells."""
    if p < 1:
        raise ValueError(f"unsupported exponent p={p}; need p >= 1")
    fv = np.asarray(f.cells, dtype=np.float64)
    wv = np.asarray(w.cells, dtype=np.float64)
    return float((fv**p * wv).sum() ** (1.0 / p))


def llogl_functional(f: Grid2D, W: Grid2D, t: float) -> float:
    """Sum over cells of (f/t) * (1 + log+(f/t)) * W."""
    if t <= 0:
        raise ValueError(f"threshold must be positive, got {t}")
    r = np.asarray(f.cells, dtype=np.float64) / t
    wv = np.asarray(W.cells, dtype=np.float64)
    return float((r * (1.0 + np.log(np.maximum(r, 1.0))) * wv).sum())


@dataclass(frozen=True)
class ApStarEstimate:
    p: float
    value: float
    basis_scanned: int


def _window_min(cells: np.ndarray, w: int, h: int) -> np.ndarray:
    t = sliding_window_view(cells, w, axis=1).min(axis=-1)
    return sliding_window_view(t, h, axis=0).min(axis=-1)


def apstar_constant(w: Grid2D, p: float, restrict_dyadic: bool = False) -> ApStarEstimate:
    """Scan of the A_p*-defining product over all axis-parallel cell
    rectangles (or only grid-aligned dyadic ones). For p = 1 the dual
    factor is 1/min over the rectangle, exact in the cell model. Any zero
    cell makes the constant +inf (sentinel, not an error)."""
    if p < 1:
        raise ValueError(f"unsupported exponent p={p}; need p >= 1")
    n = w.side
    cells = np.asarray(w.cells, dtype=np.float64)

    def shapes():
        if restrict_dyadic:
            ww = 1
            while ww <= n:
                hh = 1
                while hh <= n:
                    yield ww, hh, True
                    hh *= 2
                ww *= 2
        else:
            for hh in range(1, n + 1):
                for ww in range(1, n + 1):
                    yield ww, hh, False

    count = sum(
        (n // ww) * (n // hh) if dy else (n - ww + 1) * (n - hh + 1)
        for ww, hh, dy in shapes())

    if (cells == 0).any():
        return ApStarEstimate(p, math.inf, count)

    sat = SummedAreaTable(Grid2D(cells))
    dual_sat = None
    if p > 1:
        dual_sat = SummedAreaTable(Grid2D(cells ** (-1.0 / (p - 1.0))))
    best = 0.0
    for ww, hh, dy in shapes():
        area = ww * hh
        avg = sat.box_sums(ww, hh) / area
        if p > 1:
            dual = (dual_sat.box_sums(ww, hh) / area) ** (p - 1.0)
        else:
            dual = 1.0 / _window_min(cells, ww, hh)
        prod = avg * dual
        if dy:
            prod = prod[::hh, ::ww]
        best = max(best, float(prod.max()))
    return ApStarEstimate(p, best, count)


_EPS_SPIKE = 1e-9

_POSITIONAL = {
    "constant": ("value",),
    "checkerboard": ("a", "b"),
    "power": ("a",),
    "spike": ("x", "y"),
    "lognormal": ("seed", "sigma"),
    "cross": ("row", "col"),
    "disc": ("r", "cx", "cy"),
}


def make_weight(kind: str, side: int, **params) -> Grid2D:
    """Deterministic test-zoo grids. Kinds: constant(value), checkerboard
    (a, b), power(a) with |x|^a sampled at cell centers from the grid
    corner, spike(x, y) with floor 1e-9 elsewhere, lognormal(seed, sigma).
    Extra function shapes: cross(row, col), disc(r, cx, cy)."""
    if kind == "constant":
        v = float(params.get("value", 1.0))
        return Grid2D(np.full((side, side), v))
    if kind == "checkerboard":
        a = float(params.get("a", 1.0))
        b = float(params.get("b", 4.0))
        yy, xx = np.indices((side, side))
        return Grid2D(np.where((xx + yy) % 2 == 0, a, b))
    if kind == "power":
        a = float(params.get("a", -1.0))
        if a <= -2:
            raise ValueError(f"power exponent must exceed -2, got {a}")
        yy, xx = np.indices((side, side))
        r = np.hypot(xx + 0.5, yy + 0.5)
        return Grid2D(r**a)
    if kind == "spike":
        x = int(params.get("x", 0))
        y = int(params.get("y", 0))
        cells = np.full((side, side), _EPS_SPIKE)
        cells[y, x] = 1.0
        return Grid2D(cells)
    if kind == "lognormal":
        seed = int(params.get("seed", 0))
        sigma = float(params.get("sigma", 1.5))
        rng = np.random.default_rng(seed)
        return Grid2D(np.exp(sigma * rng.standard_normal((side, side))))
    if kind == "cross":
        row = int(params.get("row", side // 2))
        col = int(params.get("col", side // 2))
        cells = np.zeros((side, side))
        cells[row, :] = 1.0
        cells[:, col] = 1.0
        return Grid2D(cells)
    if kind == "disc":
        r = float(params.get("r", side / 4.0))
        cx = float(params.get("cx", side / 2.0))
        cy = float(params.get("cy", side / 2.0))
        yy, xx = np.indices((side, side))
        inside = np.hypot(xx + 0.5 - cx, yy + 0.5 - cy) <= r
        return Grid2D(inside.astype(np.float64))
    raise ValueError(f"unknown weight kind {kind!r}")


def parse_weight_spec(spec: str) -> tuple[str, dict]:
    """Parse CLI strings like 'constant:1', 'spike:0,0', or
    'lognormal:seed=42,sigma=1.5' into (kind, params)."""
    kind, _, rest = spec.partition(":")
    kind = kind.strip()
    if kind not in _POSITIONAL:
        raise ValueError(f"unknown weight kind {kind!r}")
    params: dict = {}
    tokens = [t for t in rest.split(",") if t.strip()] if rest else []
    names = _POSITIONAL[kind]
    for i, tok in enumerate(tokens):
        if "=" in tok:
            key, _, val = tok.partition("=")
            key = key.strip()
        else:
            if i >= len(names):
                raise ValueError(f"too many positional parameters in {spec!r}")
            key, val = names[i], tok
        if key not in names:
            raise ValueError(f"unknown parameter {key!r} for kind {kind!r}")
        val = val.strip()
        try:
            params[key] = int(val)
        except ValueError:
            params[key] = float(val)
    return kind, params


def weight_from_spec(spec: str, side: int) -> Grid2D:
    kind, params = parse_weight_spec(spec)
    return make_weight(kind, side, **params)
