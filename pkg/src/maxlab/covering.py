"""Greedy rectangle selection procedures and exhaustive invariant checkers.

Two procedures are implemented exactly as specified:

* dyadic: candidates ordered by decreasing long (x1) side, a candidate is
  selected iff its overlap with the union of already-selected rectangles
  is under a third of its area, in exact integer cell arithmetic;
* directional: rotated rectangles of bounded angular spread ordered by
  decreasing length, a candidate is selected iff the sum of its pairwise
  intersection areas with already-selected rectangles (a sum, not a union
  measure) stays at most half of its area; areas come from polygon
  clipping and near-threshold decisions resolve toward rejection.

Checkers recompute every certificate from scratch and return structured
reports instead of raising, so that a violation can be serialized with its
witness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .grids import (
    DyadicInterval,
    DyadicRect,
    GeometryError,
    Grid2D,
    is_power_of_two,
)
from .maximal import DirectionSet, hl_maximal
from .rotated import RotatedRect, intersection_area

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CheckReport:
    name: str
    status: str  # pass | fail | hypothesis-not-met
    detail: str = ""
    witness: dict | None = None

    @property
    def ok(self) -> bool:
        return self.status != "fail"

    def to_json_dict(self) -> dict:
        d = {"name": self.name, "status": self.status, "detail": self.detail}
        if self.witness is not None:
            d["witness"] = self.witness
        return d


# --- dyadic selection --------------------------------------------------------


@dataclass(frozen=True)
class DyadicTraceEntry:
    index: int          # position in the sorted input
    overlap: int        # cells shared with the union of prior selections
    area: int
    selected: bool

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.overlap, self.area)


@dataclass(frozen=True)
class DyadicSelection:
    input: list[DyadicRect]      # sorted by decreasing |P1|, ties by arrival
    selected: list[int]          # indices into input, in selection order
    overlap_trace: list[DyadicTraceEntry]
    side: int                    # ambient power-of-two grid side
    threshold: Fraction = Fraction(1, 3)


def _ambient_side(family: list[DyadicRect]) -> int:
    hi = max(max(r.ix.stop, r.iy.stop) for r in family)
    side = 1
    while side < hi:
        side *= 2
    return side


def select_dyadic(family: list[DyadicRect],
                  threshold: Fraction = Fraction(1, 3),
                  side: int | None = None) -> DyadicSelection:
    """Greedy pass in order of decreasing long side; a candidate joins the
    selection iff its overlap with the union of prior selections is under
    threshold times its area (exact integer arithmetic)."""
    if not family:
        raise ValueError("empty rectangle family")
    for r in family:
        if r.len_x < r.len_y:
            raise GeometryError(f"{r} has its long side in the x2-direction")
    threshold = Fraction(threshold)
    if side is None:
        side = _ambient_side(family)
    elif side < _ambient_side(family):
        raise ValueError("family exceeds the given grid side")
    order = sorted(range(len(family)), key=lambda i: -family[i].len_x)
    rects = [family[i] for i in order]
    mask = np.zeros((side, side), dtype=bool)
    selected: list[int] = []
    trace: list[DyadicTraceEntry] = []
    for j, r in enumerate(rects):
        a = r.as_axis_rect()
        sub = mask[a.y0 : a.y1, a.x0 : a.x1]
        overlap = int(sub.sum())
        take = Fraction(overlap, a.area) < threshold
        trace.append(DyadicTraceEntry(j, overlap, a.area, take))
        if take:
            selected.append(j)
            sub[:] = True
    return DyadicSelection(rects, selected, trace, side, threshold)


def check_dyadic_certificates(sel: DyadicSelection) -> CheckReport:
    """Replays the selection from scratch: every selected rectangle must
    beat the threshold strictly, every rejected one must have a violating
    selected prefix, and selected pairs must satisfy the dyadic structure
    facts (nested long sides, product-form intersections, short-side decay)."""
    mask = np.zeros((sel.side, sel.side), dtype=bool)
    chosen: list[int] = []
    for entry in sel.overlap_trace:
        r = sel.input[entry.index].as_axis_rect()
        sub = mask[r.y0 : r.y1, r.x0 : r.x1]
        overlap = int(sub.sum())
        take = Fraction(overlap, r.area) < sel.threshold
        if overlap != entry.overlap or take != entry.selected:
            return CheckReport(
                "dyadic-certificates", "fail",
                "trace does not match an independent replay",
                {"index": entry.index, "replayed_overlap": overlap,
                 "traced_overlap": entry.overlap})
        if take:
            chosen.append(entry.index)
            sub[:] = True
    if chosen != sel.selected:
        return CheckReport("dyadic-certificates", "fail",
                           "selected set does not match replay")
    for bi, b in enumerate(chosen):
        rb = sel.input[b]
        for a in chosen[:bi]:
            ra = sel.input[a]
            if rb.intersect(ra) is None:
                continue
            ok = (ra.ix.contains(rb.ix)
                  and rb.iy.contains(ra.iy)
                  and 3 * ra.len_y < rb.len_y)
            if not ok:
                return CheckReport(
                    "dyadic-certificates", "fail",
                    "selected pair violates the product-intersection structure",
                    {"earlier": a, "later": b})
    return CheckReport("dyadic-certificates", "pass",
                       f"{len(chosen)} selected of {len(sel.input)}")


def check_covering_inclusion(sel: DyadicSelection,
                             threshold: Fraction = Fraction(1, 3)) -> CheckReport:
    """Every cell of every input rectangle must see a dyadic-square
    maximal average of the selected-union indicator of at least the
    threshold. Exact rational arithmetic throughout."""
    side = sel.side
    ind = np.zeros((side, side), dtype=np.int64)
    for i in sel.selected:
        r = sel.input[i].as_axis_rect()
        ind[r.y0 : r.y1, r.x0 : r.x1] = 1
    fld = hl_maximal(Grid2D(ind), dyadic=True, exact=True).values.cells
    threshold = Fraction(threshold)
    for j, rect in enumerate(sel.input):
        r = rect.as_axis_rect()
        sub = fld[r.y0 : r.y1, r.x0 : r.x1]
        worst = sub.min()
        if worst < threshold:
            y, x = np.unravel_index(int(np.argmax(sub == worst)), sub.shape)
            return CheckReport(
                "covering-inclusion", "fail",
                "a covered cell falls below the maximal-average threshold",
                {"rect": j, "cell": [int(r.x0 + x), int(r.y0 + y)],
                 "value": str(worst)})
    return CheckReport("covering-inclusion", "pass",
                       f"{len(sel.input)} rectangles verified at >= {threshold}")


@dataclass(frozen=True)
class MultiplicityField:
    base_weight: Grid2D
    mu: Grid2D       # weighted multiplicity, Fraction cells
    plain: Grid2D    # plain selected-rectangle counts, int cells


def build_multiplicity(sel: DyadicSelection, U: Grid2D) -> MultiplicityField:
    """mu(x) = sum over selected R of (U(R)/|R|) 1_R(x), plus the plain
    multiplicity count. Rational cells when the weight is exact, float
    otherwise."""
    side = sel.side
    if U.side != side:
        raise ValueError(f"weight side {U.side} != selection side {side}")
    if U.is_exact:
        mu = np.full((side, side), Fraction(0), dtype=object)
    else:
        mu = np.zeros((side, side), dtype=np.float64)
    plain = np.zeros((side, side), dtype=np.int64)
    for i in sel.selected:
        r = sel.input[i].as_axis_rect()
        mass = U.cells[r.y0 : r.y1, r.x0 : r.x1].sum()
        if U.is_exact:
            mass = mass if isinstance(mass, Fraction) else Fraction(int(mass))
        mu[r.y0 : r.y1, r.x0 : r.x1] += mass / r.area
        plain[r.y0 : r.y1, r.x0 : r.x1] += 1
    return MultiplicityField(U, Grid2D(mu), Grid2D(plain))


def multiplicity_bound_check(sel: DyadicSelection) -> CheckReport:
    """For every selected prefix i and level n, the set of cells of the
    i-th selected rectangle covered at least n times by the first i
    selections must have measure at most 3^(1-n) times the rectangle's,
    exactly."""
    count = np.zeros((sel.side, sel.side), dtype=np.int64)
    for step, i in enumerate(sel.selected, start=1):
        r = sel.input[i].as_axis_rect()
        sub = count[r.y0 : r.y1, r.x0 : r.x1]
        sub += 1
        top = int(sub.max())
        for n in range(1, top + 1):
            size = int((sub >= n).sum())
            if size * 3 ** (n - 1) > r.area:
                return CheckReport(
                    "multiplicity-bound", "fail",
                    "geometric decay of the multiplicity superlevel sets fails",
                    {"selection_step": step, "n": n, "size": size,
                     "area": r.area})
    return CheckReport("multiplicity-bound", "pass",
                       f"verified through {len(sel.selected)} selections")


# --- directional selection ---------------------------------------------------


@dataclass(frozen=True)
class DirectionalTraceEntry:
    index: int
    overlap_sum: float   # sum of pairwise intersection areas at decision time
    area: float
    selected: bool


@dataclass(frozen=True)
class DirectionalSelection:
    input: list[RotatedRect]     # sorted by decreasing length, ties by arrival
    selected: list[int]
    overlap_trace: list[DirectionalTraceEntry]
    threshold: float = 0.5
    expansion: float = 5.0
    tol: float = 1e-9


def _projective(a: float) -> float:
    return a % math.pi


def projective_distance(a: float, b: float) -> float:
    """Angle between two undirected lines, in [0, pi/2]."""
    d = abs(a - b) % math.pi
    return min(d, math.pi - d)


def _angular_spread(angles: list[float]) -> float:
    vals = sorted(_projective(a) for a in angles)
    if len(vals) <= 1:
        return 0.0
    gaps = [b - a for a, b in zip(vals, vals[1:])]
    gaps.append(vals[0] + math.pi - vals[-1])
    return math.pi - max(gaps)


def select_directional(family: list[RotatedRect],
                       threshold: float = 0.5,
                       tol: float = 1e-9) -> DirectionalSelection:
    """Greedy pass in order of decreasing length; a candidate joins iff
    the sum of its pairwise intersection areas with prior selections is at
    most threshold times its own area. Decisions within tol (relative)
    of the threshold resolve toward rejection."""
    if not family:
        raise ValueError("empty rectangle family")
    spread = _angular_spread([r.theta for r in family])
    if spread > math.pi / 4 + 1e-9:
        raise GeometryError(
            f"family spans an angle of {spread:.6f} > pi/4; split into sectors")
    order = sorted(range(len(family)), key=lambda i: -family[i].length)
    rects = [family[i] for i in order]
    selected: list[int] = []
    trace: list[DirectionalTraceEntry] = []
    for j, r in enumerate(rects):
        s = float(sum(intersection_area(rects[k], r) for k in selected))
        take = bool(s <= (threshold - tol) * r.area)
        trace.append(DirectionalTraceEntry(j, s, r.area, take))
        if take:
            selected.append(j)
    return DirectionalSelection(rects, selected, trace, threshold, 5.0, tol)


def check_directional_certificates(sel: DirectionalSelection) -> CheckReport:
    """Recomputes every pairwise area and decision. Selected rectangles
    must satisfy the sum bound within tolerance; rejected ones must exceed
    it against the prefix that existed at their decision time."""
    tol = sel.tol
    chosen: list[int] = []
    for entry in sel.overlap_trace:
        r = sel.input[entry.index]
        s = sum(intersection_area(sel.input[k], r) for k in chosen)
        if abs(s - entry.overlap_sum) > tol * max(r.area, 1.0):
            return CheckReport(
                "directional-certificates", "fail",
                "recomputed overlap sum deviates from the trace",
                {"index": entry.index, "traced": entry.overlap_sum,
                 "recomputed": s})
        if entry.selected:
            if s > (sel.threshold + tol) * r.area:
                return CheckReport(
                    "directional-certificates", "fail",
                    "a selected rectangle violates the sum bound",
                    {"index": entry.index, "overlap_sum": s, "area": r.area})
            chosen.append(entry.index)
        else:
            if s <= (sel.threshold - 2 * tol) * r.area:
                return CheckReport(
                    "directional-certificates", "fail",
                    "a rejected rectangle lacks a violating prefix",
                    {"index": entry.index, "overlap_sum": s, "area": r.area})
    if chosen != sel.selected:
        return CheckReport("directional-certificates", "fail",
                           "selected set does not match replay")
    return CheckReport("directional-certificates", "pass",
                       f"{len(chosen)} selected of {len(sel.input)}")


def expand_rect(r: RotatedRect, factor: float = 5.0) -> RotatedRect:
    """Dilate about the center by the factor in both side directions."""
    return r.expanded(factor)


# --- the square-comparison lemma geometry ------------------------------------


def omega(k: int, n_directions: int) -> float:
    """Angular bucket endpoints: 0 for k = 0, else 2 pi 2^k / N."""
    if k == 0:
        return 0.0
    return TWO_PI * (2**k) / n_directions


def bucket_count(n_directions: int) -> int:
    """M: number of angular buckets below the sector width."""
    return int(math.floor(math.log2(n_directions / 8)))


def lemma31_scale(l_alpha: float, L_alpha: float, gap: float) -> float:
    """Side of the comparison square: 8 max(l, gap * L) where gap is the
    pair's actual angular distance. Using the lower bucket endpoint in
    place of the gap fails in the lowest bucket (its endpoint is zero, so
    the square cannot reach a genuinely tilted partner), and using the
    upper endpoint fails for near-parallel thin rectangles (the square
    dwarfs the partner); the actual gap handles both regimes."""
    return 8.0 * max(l_alpha, gap * L_alpha)


@dataclass(frozen=True)
class Lemma31Instance:
    r_alpha: RotatedRect
    r_beta: RotatedRect
    k: int
    n_directions: int

    @property
    def gap(self) -> float:
        return projective_distance(self.r_alpha.theta, self.r_beta.theta)

    @property
    def s_alpha(self) -> float:
        return lemma31_scale(self.r_alpha.width, self.r_alpha.length, self.gap)


def check_lemma31(inst: Lemma31Instance, samples: int = 5,
                  tol: float = 1e-9) -> CheckReport:
    """Verifies the square-comparison inequality with constant 32 on a
    samples x samples grid of points inside the first rectangle. Reports
    hypothesis-not-met when the angular bucket or length ordering fails."""
    ra, rb, k, N = inst.r_alpha, inst.r_beta, inst.k, inst.n_directions
    M = bucket_count(N)
    phi = inst.gap
    if not 0 <= k < M:
        return CheckReport("lemma31", "hypothesis-not-met",
                           f"bucket {k} outside [0, {M})")
    if not (omega(k, N) <= phi < omega(k + 1, N)):
        return CheckReport(
            "lemma31", "hypothesis-not-met",
            f"angle {phi:.6g} outside bucket [{omega(k, N):.6g}, {omega(k + 1, N):.6g})")
    if rb.length < ra.length:
        return CheckReport("lemma31", "hypothesis-not-met",
                           "partner rectangle is shorter")
    lhs = intersection_area(rb, ra) / ra.area
    s = inst.s_alpha
    star = expand_rect(rb, 5.0)
    u, v = ra.axes()
    c = np.asarray(ra.center)
    fracs = (np.arange(samples) + 0.5) / samples - 0.5
    worst = None
    for fu in fracs:
        for fv in fracs:
            x = c + fu * ra.length * u + fv * ra.width * v
            q = RotatedRect((x[0], x[1]), s, s, ra.theta)
            rhs = intersection_area(star, q) / (s * s)
            margin = lhs - 32.0 * rhs
            if worst is None or margin > worst[0]:
                worst = (margin, x, rhs)
    margin, x, rhs = worst
    if margin > tol:
        return CheckReport(
            "lemma31", "fail", "comparison inequality fails at a sample point",
            {"x": [float(x[0]), float(x[1])], "lhs": lhs, "rhs": rhs,
             "margin": margin})
    return CheckReport("lemma31", "pass",
                       f"lhs {lhs:.6g} <= 32 rhs at {samples * samples} points")


def _cell_centers(side: int) -> np.ndarray:
    yy, xx = np.indices((side, side))
    return np.column_stack([(xx + 0.5).ravel(), (yy + 0.5).ravel()])


def build_Y(sel: DirectionalSelection, side: int) -> Grid2D:
    """Per-cell count of expanded selected rectangles covering the cell
    center."""
    pts = _cell_centers(side)
    y = np.zeros(side * side, dtype=np.int64)
    for i in sel.selected:
        y += expand_rect(sel.input[i], sel.expansion).contains_points(pts)
    return Grid2D(y.reshape(side, side))


def check_directional_covering(sel: DirectionalSelection, n_directions: int,
                               side: int) -> CheckReport:
    """Computes the square-maximal field of the expanded-selection count Y
    and reports the minimum over all cells covered by input rectangles,
    scaled by log N (the empirical covering constant)."""
    y = Grid2D(np.asarray(build_Y(sel, side).cells, dtype=np.float64))
    fld = hl_maximal(y, exact=False).values.cells
    pts = _cell_centers(side)
    covered = np.zeros(side * side, dtype=bool)
    for r in sel.input:
        covered |= r.contains_points(pts)
    if not covered.any():
        return CheckReport("directional-covering", "pass",
                           "no cell centers covered; vacuous",
                           {"min_value": math.inf, "empirical_C": math.inf})
    m = float(fld.ravel()[covered].min())
    c = m * math.log(n_directions)
    status = "pass" if m > 0 else "fail"
    return CheckReport("directional-covering", status,
                       f"min maximal average {m:.6g}, empirical constant {c:.6g}",
                       {"min_value": m, "empirical_C": c})


# --- random families and serialization ---------------------------------------


def random_dyadic_family(rng: np.random.Generator, side: int = 64,
                         count: int = 40) -> list[DyadicRect]:
    if not is_power_of_two(side):
        raise ValueError(f"side must be a power of two, got {side}")
    m = side.bit_length() - 1
    out = []
    for _ in range(count):
        lx = int(rng.integers(0, m + 1))
        ly = int(rng.integers(0, lx + 1))
        ix = DyadicInterval(lx, int(rng.integers(0, side >> lx)))
        iy = DyadicInterval(ly, int(rng.integers(0, side >> ly)))
        out.append(DyadicRect(ix, iy))
    return out


def random_directional_family(rng: np.random.Generator, n_directions: int = 32,
                              side: int = 64, count: int = 30,
                              sector: int | None = None) -> list[RotatedRect]:
    dirs = DirectionSet(n_directions)
    if sector is None:
        sector = int(rng.integers(0, 8))
    angles = dirs.sector_angles(sector)
    out = []
    for _ in range(count):
        theta = float(rng.choice(angles))
        length = float(2.0 ** rng.uniform(2.0, math.log2(side * 0.75)))
        aspect = float(2.0 ** rng.uniform(0.0, 4.0))
        width = max(length / aspect, 0.25)
        cx, cy = rng.uniform(0.0, side, 2)
        out.append(RotatedRect((float(cx), float(cy)), length, width, theta))
    return out


def random_lemma31_instance(rng: np.random.Generator, n_directions: int,
                            domain: float = 64.0) -> Lemma31Instance:
    """Random pair satisfying the lemma hypotheses: directions from the
    uniform set with an index gap inside bucket k, partner at least as
    long, centers close enough to intersect often."""
    N = n_directions
    M = bucket_count(N)
    k = int(rng.integers(0, M))
    if k == 0:
        d = int(rng.integers(0, 2))
    else:
        d = int(rng.integers(2**k, 2 ** (k + 1)))
    j0 = int(rng.integers(0, N))
    theta_a = TWO_PI * j0 / N
    theta_b = theta_a + (1 if rng.random() < 0.5 else -1) * TWO_PI * d / N
    L_a = float(2.0 ** rng.uniform(1.0, 5.0))
    l_a = L_a / float(2.0 ** rng.uniform(0.0, 5.0))
    L_b = L_a * float(2.0 ** rng.uniform(0.0, 2.0))
    l_b = L_b / float(2.0 ** rng.uniform(0.0, 5.0))
    ca = rng.uniform(0.25 * domain, 0.75 * domain, 2)
    cb = ca + rng.normal(0.0, L_a / 2.0, 2)
    ra = RotatedRect((float(ca[0]), float(ca[1])), L_a, l_a, theta_a)
    rb = RotatedRect((float(cb[0]), float(cb[1])), L_b, l_b, theta_b % TWO_PI)
    return Lemma31Instance(ra, rb, k, N)


def dyadic_rect_from_bounds(x0: int, x1: int, y0: int, y1: int) -> DyadicRect:
    def interval(a: int, b: int) -> DyadicInterval:
        length = b - a
        if length <= 0 or not is_power_of_two(length) or a % length != 0:
            raise ValueError(f"[{a}, {b}) is not a dyadic interval")
        return DyadicInterval(length.bit_length() - 1, a // length)

    return DyadicRect(interval(x0, x1), interval(y0, y1))


def dyadic_family_to_json(family: list[DyadicRect], side: int | None = None) -> dict:
    return {
        "mode": "dyadic",
        "side": side if side is not None else _ambient_side(family),
        "rects": [[r.ix.start, r.ix.stop, r.iy.start, r.iy.stop] for r in family],
    }


def _directional_side(family: list[RotatedRect]) -> int:
    hi = max(max(abs(v) for v in r.bounding_box()) for r in family)
    side = 1
    while side < hi:
        side *= 2
    return side


def directional_family_to_json(family: list[RotatedRect], n_directions: int,
                               side: int | None = None) -> dict:
    return {
        "mode": "directional",
        "N": n_directions,
        "side": side if side is not None else _directional_side(family),
        "rects": [
            [r.center[0], r.center[1], r.length, r.width, r.theta] for r in family
        ],
    }


def family_from_json(doc: dict):
    """Returns (mode, family, meta) from the covering family schema."""
    mode = doc.get("mode")
    rects = doc.get("rects")
    if mode not in ("dyadic", "directional") or not isinstance(rects, list):
        raise ValueError("family file needs mode dyadic|directional and a rects list")
    if not rects:
        raise ValueError("family file has no rectangles")
    if mode == "dyadic":
        fam = [dyadic_rect_from_bounds(*map(int, r)) for r in rects]
        return mode, fam, {"side": int(doc.get("side", _ambient_side(fam)))}
    fam = [RotatedRect((float(r[0]), float(r[1])), float(r[2]), float(r[3]),
                       float(r[4])) for r in rects]
    return mode, fam, {"N": int(doc.get("N", 32)),
                       "side": int(doc.get("side", _directional_side(fam)))}
