"""Rectangle-selection procedures: worked examples, certificate replay,
multiplicity and covering bounds, the square-scale comparison lemma."""

import math
from fractions import Fraction

import numpy as np
import pytest

from maxlab.covering import (
    Lemma31Instance,
    bucket_count,
    build_Y,
    build_multiplicity,
    check_covering_inclusion,
    check_directional_certificates,
    check_directional_covering,
    check_dyadic_certificates,
    check_lemma31,
    directional_family_to_json,
    dyadic_family_to_json,
    dyadic_rect_from_bounds,
    expand_rect,
    family_from_json,
    lemma31_scale,
    multiplicity_bound_check,
    omega,
    projective_distance,
    random_directional_family,
    random_dyadic_family,
    random_lemma31_instance,
    select_directional,
    select_dyadic,
)
from maxlab.grids import GeometryError, Grid2D
from maxlab.rotated import RotatedRect, intersection_area


def rect(x0, x1, y0, y1):
    return dyadic_rect_from_bounds(x0, x1, y0, y1)


# --- greedy pass over axis-parallel dyadic rectangles -------------------------


def test_duplicate_rect_rejected():
    sel = select_dyadic([rect(0, 4, 0, 2), rect(0, 4, 0, 2)])
    assert sel.selected == [0]
    assert sel.overlap_trace[1].ratio == Fraction(1, 1)


def test_disjoint_all_selected():
    fam = [rect(0, 4, 0, 2), rect(4, 8, 0, 2), rect(0, 4, 2, 4)]
    sel = select_dyadic(fam)
    assert sel.selected == [0, 1, 2]
    assert check_dyadic_certificates(sel).ok


def test_half_overlap_rejected_at_one_third():
    # second rect loses half its area to the first: 1/2 >= 1/3
    sel = select_dyadic([rect(0, 8, 0, 1), rect(0, 2, 0, 2)])
    assert sel.selected == [0]
    assert sel.overlap_trace[1].ratio == Fraction(1, 2)
    assert check_dyadic_certificates(sel).ok


def test_small_overlap_accepted():
    # [0,8)x[0,1) then [0,4)x[0,4): shared area 4 of 16 -> ratio 1/4 < 1/3
    sel = select_dyadic([rect(0, 8, 0, 1), rect(0, 4, 0, 4)])
    assert len(sel.selected) == 2
    assert sel.overlap_trace[1].ratio == Fraction(1, 4)


def test_orientation_must_be_landscape():
    with pytest.raises(GeometryError):
        select_dyadic([rect(0, 2, 0, 4)])


def test_sort_is_by_decreasing_width_stable():
    fam = [rect(0, 2, 0, 2), rect(0, 8, 0, 1), rect(2, 4, 0, 2)]
    sel = select_dyadic(fam)
    assert [r.len_x for r in sel.input] == [8, 2, 2]
    # ties keep family order
    assert sel.input[1].as_axis_rect().x0 == 0


def test_certificates_on_random_families():
    rng = np.random.default_rng(17)
    for _ in range(25):
        fam = random_dyadic_family(rng, side=64, count=40)
        sel = select_dyadic(fam)
        assert check_dyadic_certificates(sel).ok
        assert multiplicity_bound_check(sel).ok
        assert check_covering_inclusion(sel).ok


def test_certificate_structural_pair_fact():
    # intersecting selected pairs must nest: narrower but more than 3x taller
    fam = [rect(0, 64, 0, 1), rect(32, 64, 32, 64), rect(0, 8, 0, 8)]
    sel = select_dyadic(fam)
    assert sel.selected == [0, 1, 2]
    assert check_dyadic_certificates(sel).ok


def test_multiplicity_field_bound():
    rng = np.random.default_rng(23)
    fam = random_dyadic_family(rng, side=32, count=30)
    sel = select_dyadic(fam, side=32)
    U = Grid2D(np.ones((32, 32), dtype=np.int64))
    mf = build_multiplicity(sel, U)
    n = len(sel.selected)
    # pointwise form of the size bound: mu weights 3^(j-1) per rect
    assert mf.plain.cells.max() <= n
    total = mf.mu.total()
    assert float(total) <= 32 * 32 * max(1, 3 ** (n - 1))


def test_covering_inclusion_reports_witness_on_failure():
    # a selection trimmed by hand cannot cover rejected rects
    fam = [rect(0, 8, 0, 8), rect(8, 16, 8, 16)]
    sel = select_dyadic(fam, side=16)
    forced = type(sel)(sel.input, [0], sel.overlap_trace, sel.side, sel.threshold)
    rep = check_covering_inclusion(forced)
    assert rep.status == "fail"
    assert "cell" in rep.witness


# --- greedy pass over rotated rectangles --------------------------------------


def test_directional_duplicate_rejected():
    r = RotatedRect((4, 4), 4.0, 1.0, 0.1)
    sel = select_directional([r, RotatedRect((4, 4), 4.0, 1.0, 0.1)])
    assert sel.selected == [0]
    assert check_directional_certificates(sel).ok


def test_directional_sector_width_enforced():
    fam = [RotatedRect((0, 0), 4.0, 1.0, 0.0),
           RotatedRect((0, 0), 4.0, 1.0, math.pi / 3)]
    with pytest.raises(GeometryError):
        select_directional(fam)


def test_directional_wraparound_angles_allowed():
    # angles straddling the projective seam still form a narrow sector
    fam = [RotatedRect((2, 2), 4.0, 1.0, 0.05),
           RotatedRect((6, 6), 4.0, 1.0, math.pi - 0.05)]
    sel = select_directional(fam)
    assert check_directional_certificates(sel).ok


def test_directional_sum_criterion_uses_all_prior():
    # two disjoint slabs each cover 3/8 of the candidate: the sum 3/4
    # exceeds half even though each single overlap stays below half
    a = RotatedRect((2.0, 3.75), 6.0, 2.0, 0.0)
    b = RotatedRect((2.0, 6.25), 6.0, 2.0, 0.0)
    c = RotatedRect((2.0, 5.0), 4.0, 2.0, 0.0)
    assert intersection_area(a, b) == pytest.approx(0.0, abs=1e-12)
    assert intersection_area(a, c) == pytest.approx(3.0)
    sel = select_directional([a, b, c])
    assert sel.selected == [0, 1]
    assert sel.overlap_trace[2].overlap_sum == pytest.approx(6.0)
    assert check_directional_certificates(sel).ok


def test_directional_selection_order_and_rejection():
    long = RotatedRect((5.0, 1.0), 10.0, 2.0, 0.0)
    a = RotatedRect((2.0, 1.0), 4.0, 2.0, 0.0)
    b = RotatedRect((8.0, 1.0), 4.0, 2.0, 0.0)
    sel = select_directional([a, long, b])
    # longest first; a and b sit inside it, losing their whole area
    assert [sel.input[i].length for i in sel.selected] == [10.0]
    assert sel.overlap_trace[1].overlap_sum == pytest.approx(sel.input[1].area)
    assert check_directional_certificates(sel).ok


def test_directional_certificates_on_random_families():
    rng = np.random.default_rng(29)
    for _ in range(10):
        fam = random_directional_family(rng, n_directions=32, side=32, count=25)
        sel = select_directional(fam)
        assert check_directional_certificates(sel).ok
        rep = check_directional_covering(sel, 32, 32)
        assert rep.ok


def test_pairwise_overlap_monte_carlo():
    rng = np.random.default_rng(31)
    fam = random_directional_family(rng, n_directions=16, side=16, count=12)
    sel = select_directional(fam)
    # replay one traced sum against sampling
    j = next(e.index for e in sel.overlap_trace if not e.selected and e.overlap_sum > 0)
    r = sel.input[j]
    prior = [sel.input[k] for k in sel.selected if k < j]
    n = 400_000
    u, v = r.axes()
    offs = rng.uniform(-0.5, 0.5, (n, 2))
    pts = np.asarray(r.center) + offs[:, :1] * r.length * u + offs[:, 1:] * r.width * v
    s_est = 0.0
    var = 0.0
    for q in prior:
        p = q.contains_points(pts).mean()
        s_est += r.area * p
        var += (r.area ** 2) * p * (1 - p) / n
    traced = next(e.overlap_sum for e in sel.overlap_trace if e.index == j)
    assert traced == pytest.approx(s_est, abs=max(3 * math.sqrt(var), 1e-9))


def test_expand_rect_scales_about_center():
    r = RotatedRect((3, 4), 2.0, 1.0, 0.7)
    e = expand_rect(r, 5.0)
    assert e.center == r.center and e.theta == r.theta
    assert e.length == 10.0 and e.width == 5.0


def test_build_y_counts_expanded_cover():
    r = RotatedRect((8, 8), 4.0, 2.0, 0.0)
    sel = select_directional([r])
    y = build_Y(sel, 16)
    # 5x expansion covers [-2,18]x[3,13]: rows 3..12 fully inside
    assert y.cells.sum() == 16 * 10
    assert y.cells.max() == 1


def test_directional_covering_positive_constant():
    rng = np.random.default_rng(37)
    fam = random_directional_family(rng, n_directions=16, side=32, count=20)
    sel = select_directional(fam)
    rep = check_directional_covering(sel, 16, 32)
    assert rep.ok
    assert rep.witness["empirical_C"] > 0


# --- comparison scale for squares vs rotated rectangles -----------------------


def test_omega_and_buckets():
    n = 64
    assert omega(0, n) == 0.0
    assert omega(1, n) == pytest.approx(4 * math.pi / n)
    assert omega(2, n) == pytest.approx(8 * math.pi / n)
    assert bucket_count(64) == 3
    assert bucket_count(16) == 1


def test_projective_distance():
    assert projective_distance(0.1, math.pi - 0.1) == pytest.approx(0.2)
    assert projective_distance(0.3, 0.3) == 0.0
    assert projective_distance(0.0, math.pi / 2) == pytest.approx(math.pi / 2)


def test_lemma31_scale_tracks_both_regimes():
    # wide angular gap: square follows the sweep gap * L
    assert lemma31_scale(0.5, 16.0, 0.25) == pytest.approx(8 * 4.0)
    # near-parallel: square follows the short side
    assert lemma31_scale(0.5, 16.0, 0.001) == pytest.approx(8 * 0.5)


def test_lemma31_random_instances():
    rng = np.random.default_rng(41)
    for n in (16, 32, 64):
        for _ in range(40):
            inst = random_lemma31_instance(rng, n)
            rep = check_lemma31(inst)
            assert rep.status != "fail", rep.detail


def test_lemma31_hypothesis_gates():
    n = 64
    ra = RotatedRect((0, 0), 4.0, 1.0, 0.0)
    # same angle but bucket k=1 claims a gap that is not there
    rb = RotatedRect((0, 0), 8.0, 1.0, 0.0)
    rep = check_lemma31(Lemma31Instance(ra, rb, 1, n))
    assert rep.status == "hypothesis-not-met"
    # partner shorter than the base rect violates the length ordering
    rb2 = RotatedRect((0, 0), 2.0, 1.0, 0.01)
    rep2 = check_lemma31(Lemma31Instance(ra, rb2, 0, n))
    assert rep2.status == "hypothesis-not-met"
    # bucket index beyond the grid's range
    rep3 = check_lemma31(Lemma31Instance(ra, rb, bucket_count(n) + 2, n))
    assert rep3.status == "hypothesis-not-met"


def test_lemma31_disjoint_pair_passes_trivially():
    n = 32
    ra = RotatedRect((0, 0), 4.0, 1.0, 0.0)
    rb = RotatedRect((100, 100), 8.0, 2.0, 0.05)
    rep = check_lemma31(Lemma31Instance(ra, rb, 0, n))
    assert rep.status == "pass"


# --- serialization -------------------------------------------------------------


def test_dyadic_json_roundtrip():
    fam = [rect(0, 8, 0, 2), rect(4, 8, 4, 8)]
    doc = dyadic_family_to_json(fam, side=8)
    mode, back, meta = family_from_json(doc)
    assert mode == "dyadic" and meta["side"] == 8
    assert [(r.as_axis_rect().x0, r.as_axis_rect().x1) for r in back] == [(0, 8), (4, 8)]


def test_directional_json_roundtrip():
    fam = [RotatedRect((4.5, 3.25), 6.0, 1.5, 0.375)]
    doc = directional_family_to_json(fam, 32)
    mode, back, meta = family_from_json(doc)
    assert mode == "directional" and meta["N"] == 32
    r = back[0]
    assert (r.center, r.length, r.width, r.theta) == ((4.5, 3.25), 6.0, 1.5, 0.375)


def test_dyadic_rect_from_bounds_validates():
    with pytest.raises(ValueError):
        dyadic_rect_from_bounds(1, 3, 0, 1)  # left edge not aligned
    with pytest.raises(ValueError):
        dyadic_rect_from_bounds(0, 3, 0, 1)  # length not a power of two
