"""Grid domain model: dyadic structure, rectangles, exact integration."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maxlab.grids import (
    AxisRect,
    BoundsError,
    DyadicInterval,
    DyadicRect,
    GeometryError,
    Grid2D,
    SummedAreaTable,
    average,
    dyadic_intervals,
    enumerate_dyadic_rects,
    format_number,
    integrate,
    is_power_of_two,
    read_grid_csv,
    read_grid_json,
    write_grid_csv,
    write_grid_json,
)


def test_power_of_two_predicate():
    assert [n for n in range(1, 17) if is_power_of_two(n)] == [1, 2, 4, 8, 16]
    assert not is_power_of_two(0)
    assert not is_power_of_two(-4)


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid2D(np.zeros((3, 3)))  # not a power of two
    with pytest.raises(ValueError):
        Grid2D(np.zeros((4, 2)))  # not square
    with pytest.raises(ValueError):
        Grid2D(np.full((4, 4), -1.0))
    with pytest.raises(ValueError):
        Grid2D(np.full((4, 4), np.nan))


def test_grid_backends():
    assert not Grid2D.constant(4, 2.0).is_exact
    assert Grid2D(np.ones((4, 4), dtype=np.int64)).is_exact
    exact = Grid2D(np.full((2, 2), Fraction(1, 3), dtype=object))
    assert exact.is_exact
    assert exact.total() == Fraction(4, 3)


def test_dyadic_interval_basics():
    i = DyadicInterval(2, 3)
    assert (i.start, i.stop, i.length) == (12, 16, 4)
    assert DyadicInterval(3, 1).contains(i)  # [8, 16) is the parent
    assert i.intersect(DyadicInterval(3, 1)) == i
    assert i.intersect(DyadicInterval(2, 2)) is None
    assert i.intersect(DyadicInterval(3, 0)) is None


@given(st.integers(0, 3), st.integers(0, 7), st.integers(0, 3), st.integers(0, 7))
def test_dyadic_trichotomy(la, ja, lb, jb):
    # two dyadic intervals are nested or disjoint, never partially overlapping
    a = DyadicInterval(la, ja)
    b = DyadicInterval(lb, jb)
    lo, hi = max(a.start, b.start), min(a.stop, b.stop)
    got = a.intersect(b)
    if lo >= hi:
        assert got is None
    else:
        assert got is not None
        assert (got.start, got.stop) == (lo, hi)


def test_dyadic_interval_enumeration():
    ivs = dyadic_intervals(8)
    assert len(ivs) == 8 + 4 + 2 + 1
    assert len({(i.start, i.stop) for i in ivs}) == len(ivs)


def test_dyadic_rect_projections():
    r = DyadicRect(DyadicInterval(3, 0), DyadicInterval(1, 2))
    assert (r.len_x, r.len_y, r.area) == (8, 2, 16)
    assert r.long_side_x1
    assert r.as_axis_rect() == AxisRect(0, 8, 4, 6)


def test_enumerate_dyadic_rects_side2():
    # 3 x-intervals times 3 y-intervals
    rects = enumerate_dyadic_rects(2)
    assert len(rects) == 9
    assert len(set(rects)) == 9
    long_only = enumerate_dyadic_rects(2, long_side_x1=True)
    assert set(long_only) == {r for r in rects if r.len_x >= r.len_y}
    assert len(long_only) == 9 - len([r for r in rects if r.len_x < r.len_y])


def test_axis_rect_validation():
    with pytest.raises(GeometryError):
        AxisRect(2, 2, 0, 1)
    r = AxisRect(1, 3, 0, 4)
    assert (r.width, r.height, r.area) == (2, 4, 8)
    assert r.contains_cell(2, 3) and not r.contains_cell(3, 0)


@settings(max_examples=50)
@given(st.integers(0, 10**6))
def test_sat_matches_direct_sum(seed):
    rng = np.random.default_rng(seed)
    g = Grid2D(rng.integers(0, 100, (8, 8)).astype(np.int64))
    sat = SummedAreaTable(g)
    x0, y0 = rng.integers(0, 8, 2)
    x1 = int(rng.integers(x0 + 1, 9))
    y1 = int(rng.integers(y0 + 1, 9))
    r = AxisRect(int(x0), x1, int(y0), y1)
    assert sat.rect_sum(r) == integrate(g, r)
    assert sat.rect_sum(r) == g.cells[r.y0 : r.y1, r.x0 : r.x1].sum()


def test_sat_exact_fractions():
    cells = np.array(
        [[Fraction(1, 3), Fraction(1, 5)], [Fraction(2, 7), Fraction(1, 2)]],
        dtype=object,
    )
    sat = SummedAreaTable(Grid2D(cells))
    whole = AxisRect(0, 2, 0, 2)
    assert sat.rect_sum(whole) == Fraction(1, 3) + Fraction(1, 5) + Fraction(2, 7) + Fraction(1, 2)
    assert average(Grid2D(cells), whole) == sat.rect_sum(whole) / 4


def test_box_sums_alignment():
    g = Grid2D(np.arange(16, dtype=np.int64).reshape(4, 4))
    sums = SummedAreaTable(g).box_sums(2, 3)
    assert sums.shape == (2, 3)
    assert sums[1, 2] == g.cells[1:4, 2:4].sum()


def test_bounds_errors():
    g = Grid2D.constant(4)
    with pytest.raises(BoundsError):
        integrate(g, AxisRect(0, 5, 0, 1))
    with pytest.raises(BoundsError):
        SummedAreaTable(g).rect_sum(AxisRect(-1, 2, 0, 1))


def test_format_number_twelve_digits():
    assert format_number(0.5) == "0.5"
    assert format_number(1 / 3) == "0.333333333333"
    assert format_number(float("inf")) == "inf"


def test_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(3)
    g = Grid2D(rng.uniform(0, 5, (8, 8)))
    path = tmp_path / "g.csv"
    write_grid_csv(g, path, header={"weight": "test"})
    back, header = read_grid_csv(path)
    assert header == {"weight": "test"}
    assert np.allclose(back.cells, g.cells, rtol=1e-11)


def test_json_roundtrip(tmp_path):
    g = Grid2D(np.arange(16, dtype=np.float64).reshape(4, 4))
    path = tmp_path / "g.json"
    write_grid_json(g, path)
    assert np.array_equal(read_grid_json(path).cells, g.cells)
