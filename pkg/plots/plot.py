#!/usr/bin/env python3
"""Render harness output files into figures.

Kinds:
  ratio-hist    JSON-lines inequality reports -> ratio distribution
  sweep-logn    sweep JSON -> worst ratio squared against log N with fit
  field-heatmap grid CSV (# key=value headers) -> heatmap with colorbar

Reads only the documented file formats; every annotated number is read
from the input or re-derived identically to it. Exit codes: 0 ok,
2 unreadable/mismatched input.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

SLOPE_TOL = 1e-9


class InputError(Exception):
    pass


def load_reports(path) -> list[dict]:
    try:
        text = open(path).read()
    except OSError as e:
        raise InputError(str(e))
    lines = [l for l in text.splitlines() if l.strip()]
    if not lines:
        raise InputError(f"{path}: no report lines")
    docs = []
    for i, line in enumerate(lines):
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as e:
            raise InputError(f"{path}:{i + 1}: {e}")
        if not isinstance(doc, dict) or "ratio" not in doc:
            raise InputError(f"{path}:{i + 1}: missing 'ratio'")
        docs.append(doc)
    return docs


def load_sweep(path) -> dict:
    try:
        text = open(path).read()
    except OSError as e:
        raise InputError(str(e))
    if not text.strip():
        raise InputError(f"{path}: empty file")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: {e}")
    pts = doc.get("points")
    if not isinstance(pts, list) or not pts:
        raise InputError(f"{path}: no 'points' array")
    for p in pts:
        if "N" not in p or "worst_ratio" not in p:
            raise InputError(f"{path}: point missing 'N'/'worst_ratio'")
    return doc


def load_grid_csv(path) -> tuple[np.ndarray, dict]:
    header: dict = {}
    rows: list[list[float]] = []
    try:
        lines = open(path).read().splitlines()
    except OSError as e:
        raise InputError(str(e))
    for i, line in enumerate(lines):
        if not line.strip():
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                k, _, v = body.partition("=")
                header[k.strip()] = v.strip()
            continue
        try:
            rows.append([float(x) for x in line.split(",")])
        except ValueError as e:
            raise InputError(f"{path}:{i + 1}: {e}")
    if not rows:
        raise InputError(f"{path}: no data rows")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise InputError(f"{path}: ragged rows (expected width {width})")
    return np.asarray(rows, dtype=np.float64), header


def fit_slope(Ns, worsts) -> tuple[float, float] | None:
    if len(Ns) < 2:
        return None
    x = np.log(np.asarray(Ns, dtype=np.float64))
    y = np.asarray(worsts, dtype=np.float64) ** 2
    a = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(a, y, rcond=None)
    return float(slope), float(intercept)


def render_ratio_hist(docs: list[dict], out, title: str | None):
    ratios = [float(d["ratio"]) for d in docs]
    finite = [r for r in ratios if math.isfinite(r)]
    if not finite:
        raise InputError("all ratios are non-finite")
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(finite, bins=min(40, max(8, len(finite) // 5)), color="#4878a8")
    ax.axvline(max(finite), color="#a83232", linestyle="--",
               label=f"worst={max(finite):.6g}")
    ax.set_xlabel("ratio")
    ax.set_ylabel("count")
    ax.set_title(title or f"{len(finite)} ratios")
    if len(finite) < len(ratios):
        ax.annotate(f"({len(ratios) - len(finite)} non-finite omitted)",
                    xy=(0.98, 0.9), xycoords="axes fraction", ha="right")
    ax.legend()
    fig.savefig(out, dpi=120, bbox_inches="tight")
    plt.close(fig)


def render_sweep(doc: dict, out, title: str | None) -> float | None:
    pts = sorted(doc["points"], key=lambda p: p["N"])
    Ns = [int(p["N"]) for p in pts]
    worsts = [float(p["worst_ratio"]) for p in pts]
    x = np.log(np.asarray(Ns, dtype=np.float64))
    y = np.asarray(worsts) ** 2
    fit = fit_slope(Ns, worsts)
    stored = doc.get("slope")
    if fit is not None and stored is not None:
        if abs(fit[0] - float(stored)) > SLOPE_TOL:
            raise InputError(
                f"recomputed slope {fit[0]!r} disagrees with stored {stored!r}")
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.scatter(x, y, color="#4878a8", zorder=3)
    for xi, yi, n in zip(x, y, Ns):
        ax.annotate(f"N={n}", (xi, yi), textcoords="offset points",
                    xytext=(4, 4), fontsize=8)
    if fit is not None:
        s, c = fit
        xs = np.linspace(x.min(), x.max(), 50)
        ax.plot(xs, s * xs + c, color="#a83232", label=f"slope={s:.6g}")
        ax.legend()
    ax.set_xlabel("log N")
    ax.set_ylabel("worst ratio squared")
    ax.set_title(title or "weak-type ratio growth")
    fig.savefig(out, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return None if fit is None else fit[0]


def render_heatmap(grid: np.ndarray, header: dict, out, title: str | None):
    side = grid.shape[0]
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    im = ax.imshow(grid, origin="lower", extent=(0, grid.shape[1], 0, side),
                   cmap="viridis")
    fig.colorbar(im, ax=ax)
    ax.set_title(title or header.get("operator", "field"))
    fig.savefig(out, dpi=120, bbox_inches="tight")
    plt.close(fig)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--kind", required=True,
                    choices=["ratio-hist", "sweep-logn", "field-heatmap"])
    ap.add_argument("--in", dest="inp", required=True, help="input file")
    ap.add_argument("--out", required=True, help="output image file")
    ap.add_argument("--title", default=None)
    args = ap.parse_args(argv)
    try:
        if args.kind == "ratio-hist":
            render_ratio_hist(load_reports(args.inp), args.out, args.title)
        elif args.kind == "sweep-logn":
            slope = render_sweep(load_sweep(args.inp), args.out, args.title)
            if slope is not None:
                print(f"slope={slope:.12g}")
        else:
            grid, header = load_grid_csv(args.inp)
            render_heatmap(grid, header, args.out, args.title)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
