"""Command-line entry point.

Subcommands: compute (maximal fields of a grid file), covering (selection
procedures plus all checkers on a rectangle family), verify (randomized
inequality suites), sweep-n (direction-count scaling), search-p11
(adversarial ratio search), make-weight (write zoo grids).

Exit codes: 0 success, 1 invariant or baseline failure, 2 usage/input
error. Randomized commands require --seed. Numeric output is printed with
12 significant digits. An optional key=value config file supplies any
long-option value; explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import covering, experiments, figures
from .grids import BoundsError, GeometryError, Grid2D, format_number, read_grid_csv, write_grid_csv
from .maximal import DirectionSet, directional_maximal, hl_maximal, strong_maximal
from .weights import weight_from_spec

USAGE_ERROR = 2
CHECK_FAILED = 1


def _parse_config_file(path: str) -> dict:
    out = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"config line {raw!r} is not key=value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _merge_config(args: argparse.Namespace, defaults: dict) -> None:
    """Fill None-valued options from the config file, then from the
    per-command defaults table."""
    cfg = _parse_config_file(args.config) if getattr(args, "config", None) else {}
    for key, value in cfg.items():
        if getattr(args, key, "\0missing") is None:
            setattr(args, key, value)
    for key, value in defaults.items():
        if getattr(args, key, "\0missing") is None:
            setattr(args, key, value)


def _int(v) -> int:
    return int(v)


def _float(v) -> float:
    return float(v)


def _int_list(v) -> list[int]:
    if isinstance(v, (list, tuple)):
        return [int(x) for x in v]
    return [int(tok) for tok in str(v).split(",") if tok.strip()]


def _require_seed(args) -> int:
    if args.seed is None:
        raise ValueError("--seed is required for randomized commands")
    return _int(args.seed)


def _print_field_summary(cells: np.ndarray) -> None:
    cells = np.asarray(cells, dtype=np.float64)
    print(f"min={format_number(float(cells.min()))}")
    print(f"max={format_number(float(cells.max()))}")
    print(f"mean={format_number(float(cells.mean()))}")


# --- compute -----------------------------------------------------------------


def cmd_compute(args) -> int:
    _merge_config(args, {"op": "hl", "N": None})
    grid, _ = read_grid_csv(args.input)
    op = args.op
    if op == "hl":
        field = hl_maximal(grid, dyadic=args.dyadic)
    elif op == "strong":
        field = strong_maximal(grid)
    elif op == "directional":
        if args.N is None:
            raise ValueError("--N is required for the directional operator")
        field = directional_maximal(grid, DirectionSet(_int(args.N)))
    else:
        raise ValueError(f"unknown operator {op!r}; expected hl|strong|directional")
    if args.out:
        field.save_csv(args.out)
    _print_field_summary(field.values.cells)
    return 0


# --- covering ----------------------------------------------------------------


def _json_safe(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, dict):
        return {k: _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def _dyadic_report(family, side) -> tuple[dict, bool]:
    sel = covering.select_dyadic(family, side=side)
    checks = [
        covering.check_dyadic_certificates(sel),
        covering.multiplicity_bound_check(sel),
        covering.check_covering_inclusion(sel),
    ]
    doc = covering.dyadic_family_to_json(sel.input, sel.side)
    doc["selected"] = sel.selected
    doc["trace"] = [
        {"index": e.index, "overlap": e.overlap, "area": e.area,
         "ratio": str(e.ratio), "selected": e.selected}
        for e in sel.overlap_trace
    ]
    doc["checks"] = {c.name: _json_safe(c.to_json_dict()) for c in checks}
    return doc, all(c.ok for c in checks)


def _directional_report(family, n_directions, side) -> tuple[dict, bool]:
    sel = covering.select_directional(family)
    checks = [
        covering.check_directional_certificates(sel),
        covering.check_directional_covering(sel, n_directions, side),
    ]
    doc = covering.directional_family_to_json(sel.input, n_directions, side)
    doc["selected"] = sel.selected
    doc["trace"] = [
        {"index": e.index, "overlap_sum": e.overlap_sum, "area": e.area,
         "selected": e.selected}
        for e in sel.overlap_trace
    ]
    doc["checks"] = {c.name: _json_safe(c.to_json_dict()) for c in checks}
    return doc, all(c.ok for c in checks)


def cmd_covering(args) -> int:
    _merge_config(args, {"mode": None, "family": None, "check": "all",
                         "random": None, "side": None, "N": 32, "out": None})
    if args.family:
        doc = json.loads(Path(args.family).read_text())
        mode, family, meta = covering.family_from_json(doc)
        if args.mode and args.mode != mode:
            raise ValueError(f"--mode {args.mode} does not match family file mode {mode}")
    elif args.random is not None:
        seed = _require_seed(args)
        mode = args.mode or "dyadic"
        rng = np.random.default_rng([seed])
        if mode == "dyadic":
            side = _int(args.side) if args.side is not None else 64
            family = covering.random_dyadic_family(rng, side, _int(args.random))
            meta = {"side": side}
        else:
            n = _int(args.N)
            side = _int(args.side) if args.side is not None else 64
            family = covering.random_directional_family(rng, n, side,
                                                        _int(args.random))
            meta = {"N": n, "side": side}
    else:
        raise ValueError("need --family FILE or --random COUNT")
    if mode == "dyadic":
        doc, ok = _dyadic_report(family, meta.get("side"))
    else:
        doc, ok = _directional_report(family, meta["N"], meta["side"])
    doc["status"] = "pass" if ok else "fail"
    text = json.dumps(doc, sort_keys=True, indent=1)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    n_checks = len(doc["checks"])
    print(f"checks={'pass' if ok else 'fail'} ({n_checks} run, "
          f"{len(doc['selected'])} of {len(doc['rects'])} selected)",
          file=sys.stderr)
    return 0 if ok else CHECK_FAILED


# --- verify ------------------------------------------------------------------


def _suite_outputs(args, suite) -> None:
    prefix = args.out_prefix
    experiments.write_reports_jsonl(suite.reports, f"{prefix}.jsonl")
    experiments.write_suite_csv(suite, f"{prefix}.csv")
    if not args.no_figures:
        figures.ratio_histogram(
            [r.ratio for r in suite.reports], f"{prefix}.png",
            title=f"{suite.tag}: lhs/rhs over {suite.trials} trials")


def cmd_verify(args) -> int:
    if args.tag == "sweep-n":
        return cmd_sweep(args)
    _merge_config(args, {"trials": 100, "grid": 32, "Ns": None, "N": None,
                         "out_prefix": None, "ps": None})
    seed = _require_seed(args)
    trials, side = _int(args.trials), _int(args.grid)
    Ns = [_int(args.N)] if args.N is not None else (
        _int_list(args.Ns) if args.Ns is not None else None)
    ps = [_float(p) for p in str(args.ps).split(",")] if args.ps else None
    if args.out_prefix is None:
        args.out_prefix = args.tag
    suite = experiments.run_suite(args.tag, trials, side, seed,
                                  ps=ps, Ns=Ns)
    _suite_outputs(args, suite)
    worst, mean = suite.worst_ratio, suite.mean_ratio
    print(f"tag={suite.tag} trials={trials} side={side} seed={seed}")
    print(f"worst_ratio={format_number(worst)}")
    print(f"mean_ratio={format_number(mean)}")
    ok = math.isfinite(worst) and all(
        r.lhs >= 0 and r.rhs >= 0 for r in suite.reports)
    extra = {}
    if Ns is not None:
        extra["Ns"] = ",".join(str(n) for n in Ns)
    if ps is not None:
        extra["ps"] = ",".join(format_number(p) for p in ps)
    key = experiments.baseline_key(args.tag, side, trials, seed, **extra)
    if args.write_baselines:
        experiments.record_baselines({key: worst})
        print(f"baseline[{key}] recorded")
    else:
        status, stored = experiments.check_baseline(key, worst)
        print(f"baseline[{key}]: {status}"
              + (f" (stored {format_number(stored)})" if stored is not None else ""))
        if status == "regression":
            ok = False
    return 0 if ok else CHECK_FAILED


def cmd_sweep(args) -> int:
    _merge_config(args, {"trials": 50, "grid": 32, "Ns": "16,32,64,128",
                         "out_prefix": "sweep"})
    seed = _require_seed(args)
    Ns = _int_list(args.Ns)
    trials, side = _int(args.trials), _int(args.grid)
    sweep = experiments.sweep_directions(Ns, trials, side, seed)
    doc = sweep.to_json_dict()
    prefix = args.out_prefix
    Path(f"{prefix}.json").write_text(json.dumps(doc, sort_keys=True) + "\n")
    if not args.no_figures:
        figures.sweep_figure(doc, f"{prefix}.png")
    for n, r in sweep.points:
        print(f"N={n} worst_ratio={format_number(r)} "
              f"normalized={format_number(r / math.sqrt(math.log(n)))}")
    if sweep.slope is not None:
        print(f"slope={format_number(sweep.slope)}")
        print(f"r_squared={format_number(sweep.r_squared)}")
    ok = all(math.isfinite(r) for r in sweep.worst_ratios)
    key = experiments.baseline_key(
        "sweep", side, trials, seed, Ns=",".join(str(n) for n in Ns))
    value = max(sweep.normalized_constants)
    if args.write_baselines:
        experiments.record_baselines({key: value})
        print(f"baseline[{key}] recorded")
    else:
        status, stored = experiments.check_baseline(key, value)
        print(f"baseline[{key}]: {status}"
              + (f" (stored {format_number(stored)})" if stored is not None else ""))
        if status == "regression":
            ok = False
    return 0 if ok else CHECK_FAILED


def cmd_search_p11(args) -> int:
    _merge_config(args, {"budget": 300, "grid": 32, "out": None})
    seed = _require_seed(args)
    best = experiments.problem11_ratio_search(_int(args.budget), seed,
                                              _int(args.grid))
    text = json.dumps(best.to_json_dict(), sort_keys=True, indent=1)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    print(f"best_ratio={format_number(best.ratio)}")
    return 0 if math.isfinite(best.ratio) else CHECK_FAILED


def cmd_make_weight(args) -> int:
    _merge_config(args, {"side": 32, "weight": None, "out": None})
    if not args.weight:
        raise ValueError("--weight KIND:PARAMS is required")
    side = _int(args.side)
    w = weight_from_spec(args.weight, side)
    if args.out:
        write_grid_csv(w, args.out, header={"weight": args.weight})
    _print_field_summary(w.cells)
    return 0


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maxlab",
        description="maximal-operator fields, covering procedures, and "
                    "weighted-inequality verification on discrete grids")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file supplying option values")
    common.add_argument("--seed", default=None, help="base seed for randomized runs")

    p = sub.add_parser("compute", parents=[common],
                       help="maximal field of a grid file")
    p.add_argument("--op", default=None, help="hl|strong|directional")
    p.add_argument("--dyadic", action="store_true",
                   help="restrict hl to the dyadic subfamily")
    p.add_argument("--N", default=None, help="direction count (directional op)")
    p.add_argument("--input", required=True, help="input grid CSV")
    p.add_argument("--out", default=None, help="output field CSV")
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("covering", parents=[common],
                       help="selection procedure plus checkers on a family")
    p.add_argument("--mode", default=None, help="dyadic|directional")
    p.add_argument("--family", default=None, help="family JSON file")
    p.add_argument("--random", default=None,
                   help="generate a random family of this size (needs --seed)")
    p.add_argument("--side", default=None, help="ambient grid side")
    p.add_argument("--N", default=None, help="direction count (directional mode)")
    p.add_argument("--check", default=None, help="which checks to run (all)")
    p.add_argument("--out", default=None, help="write the JSON report here")
    p.set_defaults(func=cmd_covering)

    p = sub.add_parser("verify", parents=[common],
                       help="run a randomized inequality suite")
    p.add_argument("tag", help="fs|thm12|cor13|thm14|cor15|sweep-n")
    p.add_argument("--trials", default=None)
    p.add_argument("--grid", default=None, help="grid side (power of two)")
    p.add_argument("--N", default=None, help="pin a single direction count")
    p.add_argument("--Ns", default=None, help="comma-separated direction counts")
    p.add_argument("--ps", default=None, help="comma-separated exponents")
    p.add_argument("--out-prefix", dest="out_prefix", default=None)
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("--write-baselines", action="store_true",
                   help="record worst ratios as new regression baselines")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep-n", parents=[common],
                       help="worst weak-type ratio against direction count")
    p.add_argument("--Ns", default=None, help="comma-separated direction counts")
    p.add_argument("--trials", default=None)
    p.add_argument("--grid", default=None)
    p.add_argument("--out-prefix", dest="out_prefix", default=None)
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("--write-baselines", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("search-p11", parents=[common],
                       help="hill-climbing search for large strong-operator ratios")
    p.add_argument("--budget", default=None, help="number of ratio evaluations")
    p.add_argument("--grid", default=None)
    p.add_argument("--out", default=None, help="write the best report JSON here")
    p.set_defaults(func=cmd_search_p11)

    p = sub.add_parser("make-weight", parents=[common],
                       help="write a zoo weight/function grid to CSV")
    p.add_argument("--weight", default=None, help="spec like lognormal:seed=42,sigma=1.5")
    p.add_argument("--side", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_make_weight)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, GeometryError, BoundsError, KeyError,
            FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
