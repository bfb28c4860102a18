"""Discrete maximal-operator laboratory: grids, axis-parallel and
directional maximal fields, greedy rectangle-selection procedures with
exact invariant checkers, and an empirical harness for weighted
maximal-function inequalities."""

from .grids import (
    AxisRect,
    BoundsError,
    DyadicInterval,
    DyadicRect,
    GeometryError,
    Grid2D,
    SummedAreaTable,
    average,
    enumerate_dyadic_rects,
    format_number,
    integrate,
    read_grid_csv,
    read_grid_json,
    write_grid_csv,
    write_grid_json,
)
from .rotated import (
    RotatedRect,
    average_rotated,
    integrate_rotated,
    intersection_area,
)
from .maximal import (
    DirectionalEvaluator,
    DirectionSet,
    MaximalField,
    compose_W,
    directional_maximal,
    hl_maximal,
    strong_maximal,
)
from .weights import (
    ApStarEstimate,
    apstar_constant,
    llogl_functional,
    lp_norm,
    make_weight,
    parse_weight_spec,
    weight_from_spec,
    weighted_measure,
)
from .covering import (
    CheckReport,
    DirectionalSelection,
    DyadicSelection,
    Lemma31Instance,
    MultiplicityField,
    build_Y,
    build_multiplicity,
    check_covering_inclusion,
    check_directional_certificates,
    check_directional_covering,
    check_dyadic_certificates,
    check_lemma31,
    expand_rect,
    lemma31_scale,
    multiplicity_bound_check,
    select_directional,
    select_dyadic,
)
from .experiments import (
    InequalityReport,
    SuiteResult,
    SweepResult,
    problem11_ratio_search,
    problem11_report,
    run_suite,
    sweep_directions,
    verify_cor13,
    verify_cor15,
    verify_fs_classical,
    verify_thm12,
    verify_thm14,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
