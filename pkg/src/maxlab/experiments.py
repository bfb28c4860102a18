"""Empirical verification harness for the weighted maximal inequalities.

Each verifier evaluates both sides of one inequality on concrete grids
and returns an immutable report; suites drive the verifiers over a
seed-pinned zoo of weights and functions, in parallel across trials,
and aggregate worst-case ratios that serve as regression baselines.
Ratios use the conventions 0/0 -> 0 and x/0 -> +inf for x > 0.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .grids import Grid2D, format_number
from .maximal import (
    DirectionalEvaluator,
    DirectionSet,
    compose_W,
    hl_maximal,
    strong_maximal,
)
from .weights import llogl_functional, lp_norm, make_weight, weighted_measure


@dataclass(frozen=True)
class InequalityReport:
    tag: str
    params: dict
    lhs: float
    rhs: float
    ratio: float
    seed: tuple[int, ...] | None
    grid_side: int

    def to_json_dict(self) -> dict:
        return {
            "tag": self.tag,
            "params": self.params,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "ratio": self.ratio,
            "seed": list(self.seed) if self.seed is not None else None,
            "grid_side": self.grid_side,
            "timestamp": None,
        }


def ratio_of(lhs: float, rhs: float) -> float:
    if rhs > 0.0:
        return lhs / rhs
    return 0.0 if lhs == 0.0 else math.inf


def _require_t(t: float) -> None:
    if t <= 0:
        raise ValueError(f"threshold t must be positive, got {t}")


def verify_fs_classical(f: Grid2D, w: Grid2D, t: float,
                        seed: tuple[int, ...] | None = None,
                        extra: dict | None = None) -> InequalityReport:
    """Weak-type bound for the square maximal operator: t times the
    weighted measure of {M f > t} against the integral of f weighted by
    the maximal function of the weight."""
    _require_t(t)
    mf = hl_maximal(f).values
    mw = hl_maximal(w).values
    lhs = t * weighted_measure(w, mf.cells > t)
    rhs = float((np.asarray(f.cells, dtype=np.float64) * mw.cells).sum())
    params = {"t": t, **(extra or {})}
    return InequalityReport("fs", params, lhs, rhs, ratio_of(lhs, rhs),
                            seed, f.side)


def verify_thm12(f: Grid2D, w: Grid2D, t: float,
                 seed: tuple[int, ...] | None = None,
                 extra: dict | None = None) -> InequalityReport:
    """Weak-type bound for the strong maximal operator against the
    L log L functional of f under the composed weight W."""
    _require_t(t)
    msf = strong_maximal(f).values
    W = compose_W(w).values
    lhs = weighted_measure(w, msf.cells > t)
    rhs = llogl_functional(f, W, t)
    params = {"t": t, **(extra or {})}
    return InequalityReport("thm12", params, lhs, rhs, ratio_of(lhs, rhs),
                            seed, f.side)


def verify_cor13(f: Grid2D, w: Grid2D, p: float,
                 seed: tuple[int, ...] | None = None,
                 extra: dict | None = None) -> InequalityReport:
    """Strong-type L^p bound for the strong maximal operator under the
    composed weight W on the right-hand side."""
    if p <= 1:
        raise ValueError(f"p must exceed 1, got {p}")
    msf = strong_maximal(f).values
    W = compose_W(w).values
    lhs = lp_norm(msf, w, p)
    rhs = lp_norm(f, W, p)
    params = {"p": p, **(extra or {})}
    return InequalityReport("cor13", params, lhs, rhs, ratio_of(lhs, rhs),
                            seed, f.side)


def verify_thm14(f: Grid2D, w: Grid2D, t: float, n_directions: int,
                 evaluator: DirectionalEvaluator | None = None,
                 seed: tuple[int, ...] | None = None,
                 extra: dict | None = None) -> InequalityReport:
    """Weak-type (2,2) bound for the directional maximal operator:
    t times the square root of the weighted superlevel measure against
    the L^2(W) norm of f. The ratio squared over log N is the quantity
    expected to stay bounded."""
    _require_t(t)
    if evaluator is None:
        evaluator = DirectionalEvaluator(f.side, DirectionSet(n_directions))
    inner = hl_maximal(w).values
    mdf, W = evaluator.evaluate([f, inner])
    lhs = t * math.sqrt(weighted_measure(w, mdf.cells > t))
    rhs = lp_norm(f, W, 2)
    r = ratio_of(lhs, rhs)
    params = {"t": t, "N": n_directions,
              "ratio_sq_over_logN": r * r / math.log(n_directions),
              **(extra or {})}
    return InequalityReport("thm14", params, lhs, rhs, r, seed, f.side)


def verify_cor15(f: Grid2D, w: Grid2D, p: float, n_directions: int,
                 evaluator: DirectionalEvaluator | None = None,
                 seed: tuple[int, ...] | None = None,
                 extra: dict | None = None) -> InequalityReport:
    """Strong-type L^p bound (p > 2) for the directional maximal operator
    with the (log N)^(1/p) factor on the right-hand side."""
    if p <= 2:
        raise ValueError(f"p must exceed 2, got {p}")
    if evaluator is None:
        evaluator = DirectionalEvaluator(f.side, DirectionSet(n_directions))
    inner = hl_maximal(w).values
    mdf, W = evaluator.evaluate([f, inner])
    lhs = lp_norm(mdf, w, p)
    rhs = math.log(n_directions) ** (1.0 / p) * lp_norm(f, W, p)
    params = {"p": p, "N": n_directions, **(extra or {})}
    return InequalityReport("cor15", params, lhs, rhs, ratio_of(lhs, rhs),
                            seed, f.side)


def problem11_report(f: Grid2D, w: Grid2D, t: float, p: float,
                     seed: tuple[int, ...] | None = None,
                     extra: dict | None = None,
                     msf: np.ndarray | None = None,
                     mrw: np.ndarray | None = None) -> InequalityReport:
    """Open-problem probe: weighted superlevel measure of the strong
    maximal field against the integral of (f/t)^p weighted by the strong
    maximal function of w itself (not the composed W)."""
    _require_t(t)
    if p < 1:
        raise ValueError(f"p must be at least 1, got {p}")
    if msf is None:
        msf = strong_maximal(f).values.cells
    if mrw is None:
        mrw = strong_maximal(w).values.cells
    lhs = weighted_measure(w, msf > t)
    scaled = np.asarray(f.cells, dtype=np.float64) / t
    rhs = float(((scaled**p) * mrw).sum())
    params = {"t": t, "p": p, **(extra or {})}
    return InequalityReport("p11", params, lhs, rhs, ratio_of(lhs, rhs),
                            seed, f.side)


# --- the weight/function zoo ---------------------------------------------


_ZOO_KINDS = ("constant", "checkerboard", "power", "spike", "lognormal",
              "cross", "disc")


def _sample_kind(rng: np.random.Generator, side: int) -> tuple[str, dict]:
    kind = _ZOO_KINDS[int(rng.integers(0, len(_ZOO_KINDS)))]
    if kind == "constant":
        return kind, {"value": float(10.0 ** rng.uniform(-1.0, 1.0))}
    if kind == "checkerboard":
        return kind, {"a": float(10.0 ** rng.uniform(-1.0, 1.0)),
                      "b": float(10.0 ** rng.uniform(-1.0, 1.0))}
    if kind == "power":
        return kind, {"a": float(rng.uniform(-1.8, 0.5))}
    if kind == "spike":
        return kind, {"x": int(rng.integers(0, side)),
                      "y": int(rng.integers(0, side))}
    if kind == "lognormal":
        return kind, {"seed": int(rng.integers(0, 2**31)),
                      "sigma": float(rng.uniform(0.5, 2.5))}
    if kind == "cross":
        return kind, {"row": int(rng.integers(0, side)),
                      "col": int(rng.integers(0, side))}
    return kind, {"r": float(rng.uniform(1.0, side / 3.0)),
                  "cx": float(rng.uniform(0.2 * side, 0.8 * side)),
                  "cy": float(rng.uniform(0.2 * side, 0.8 * side))}


def _describe(kind: str, params: dict) -> str:
    inner = ",".join(f"{k}={format_number(v) if isinstance(v, float) else v}"
                     for k, v in params.items())
    return f"{kind}:{inner}" if inner else kind


def sample_zoo_pair(rng: np.random.Generator, side: int):
    """One (function, weight) draw with human-readable descriptors."""
    fk, fp = _sample_kind(rng, side)
    wk, wp = _sample_kind(rng, side)
    f = make_weight(fk, side, **fp)
    w = make_weight(wk, side, **wp)
    return f, _describe(fk, fp), w, _describe(wk, wp)


def sample_threshold(rng: np.random.Generator, f: Grid2D) -> float:
    """Levels biased toward the informative range below the peak of f."""
    top = float(np.asarray(f.cells, dtype=np.float64).max())
    return top * float(10.0 ** rng.uniform(-2.5, 0.15))


# --- suites ----------------------------------------------------------------


SUITE_TAGS = ("fs", "thm12", "cor13", "thm14", "cor15")

_DEFAULT_PS = {"cor13": (1.5, 2.0, 4.0), "cor15": (3.0, 4.0)}
_DEFAULT_NS = {"thm14": (16, 64), "cor15": (16, 64)}


def thread_count() -> int:
    """MAXLAB_THREADS: unset -> 1, 0 -> all cores, k -> k."""
    raw = os.environ.get("MAXLAB_THREADS")
    if raw is None:
        return 1
    k = int(raw)
    if k == 0:
        return os.cpu_count() or 1
    if k < 0:
        raise ValueError(f"MAXLAB_THREADS must be >= 0, got {k}")
    return k


_EVALUATOR_CACHE: dict[tuple[int, int], DirectionalEvaluator] = {}


def shared_evaluator(side: int, n_directions: int) -> DirectionalEvaluator:
    key = (side, n_directions)
    ev = _EVALUATOR_CACHE.get(key)
    if ev is None:
        ev = DirectionalEvaluator(side, DirectionSet(n_directions))
        _EVALUATOR_CACHE[key] = ev
    return ev


def _run_trial(tag: str, side: int, seed: int, index: int,
               ps, Ns) -> InequalityReport:
    pair = (seed, index)
    rng = np.random.default_rng(list(pair))
    f, fd, w, wd = sample_zoo_pair(rng, side)
    extra = {"function": fd, "weight": wd, "trial": index}
    if tag == "fs":
        return verify_fs_classical(f, w, sample_threshold(rng, f), pair, extra)
    if tag == "thm12":
        return verify_thm12(f, w, sample_threshold(rng, f), pair, extra)
    if tag == "cor13":
        p = ps[index % len(ps)]
        return verify_cor13(f, w, p, pair, extra)
    if tag == "thm14":
        n = Ns[index % len(Ns)]
        t = sample_threshold(rng, f)
        return verify_thm14(f, w, t, n, shared_evaluator(side, n), pair, extra)
    if tag == "cor15":
        p = ps[index % len(ps)]
        n = Ns[(index // len(ps)) % len(Ns)]
        return verify_cor15(f, w, p, n, shared_evaluator(side, n), pair, extra)
    raise ValueError(f"unknown suite tag {tag!r}")


@dataclass(frozen=True)
class SuiteResult:
    tag: str
    side: int
    trials: int
    seed: int
    reports: list[InequalityReport]

    @property
    def worst_ratio(self) -> float:
        return max(r.ratio for r in self.reports)

    @property
    def mean_ratio(self) -> float:
        return sum(r.ratio for r in self.reports) / len(self.reports)

    def to_json_dict(self) -> dict:
        return {
            "tag": self.tag,
            "side": self.side,
            "trials": self.trials,
            "seed": self.seed,
            "worst_ratio": self.worst_ratio,
            "mean_ratio": self.mean_ratio,
        }


def run_suite(tag: str, trials: int, side: int, seed: int,
              ps=None, Ns=None, threads: int | None = None) -> SuiteResult:
    """Seed-pinned randomized suite: trial i draws from generator state
    [seed, i], so the suite is reproducible and order-independent."""
    if tag not in SUITE_TAGS:
        raise ValueError(f"unknown suite tag {tag!r}; expected one of {SUITE_TAGS}")
    if trials < 1:
        raise ValueError(f"trials must be positive, got {trials}")
    ps = tuple(ps) if ps is not None else _DEFAULT_PS.get(tag)
    Ns = tuple(Ns) if Ns is not None else _DEFAULT_NS.get(tag)
    if Ns:
        for n in Ns:
            shared_evaluator(side, n)
    threads = thread_count() if threads is None else threads
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            reports = list(pool.map(
                lambda i: _run_trial(tag, side, seed, i, ps, Ns),
                range(trials)))
    else:
        reports = [_run_trial(tag, side, seed, i, ps, Ns)
                   for i in range(trials)]
    return SuiteResult(tag, side, trials, seed, reports)


# --- direction-count sweep ---------------------------------------------------


@dataclass(frozen=True)
class SweepResult:
    Ns: tuple[int, ...]
    worst_ratios: tuple[float, ...]
    slope: float | None       # of worst_ratio^2 against log N
    intercept: float | None
    r_squared: float | None
    trials: int
    side: int
    seed: int

    @property
    def points(self) -> list[tuple[int, float]]:
        return list(zip(self.Ns, self.worst_ratios))

    @property
    def normalized_constants(self) -> list[float]:
        return [r / math.sqrt(math.log(n))
                for n, r in zip(self.Ns, self.worst_ratios)]

    def to_json_dict(self) -> dict:
        return {
            "tag": "sweep-n",
            "points": [
                {"N": n, "worst_ratio": r, "worst_ratio_sq": r * r,
                 "normalized": r / math.sqrt(math.log(n))}
                for n, r in zip(self.Ns, self.worst_ratios)
            ],
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "trials": self.trials,
            "side": self.side,
            "seed": self.seed,
            "timestamp": None,
        }


def fit_log_slope(Ns, worst_ratios):
    """Least-squares fit of worst_ratio^2 = slope*log N + intercept.
    Returns (None, None, None) when a line is underdetermined."""
    if len(Ns) < 2:
        return None, None, None
    x = np.log(np.asarray(Ns, dtype=np.float64))
    y = np.asarray(worst_ratios, dtype=np.float64) ** 2
    a = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(a, y, rcond=None)
    pred = a @ np.array([slope, intercept])
    ss_res = float(((y - pred) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), r2


def sweep_directions(Ns=(16, 32, 64, 128), trials: int = 50, side: int = 32,
                     seed: int = 0, threads: int | None = None) -> SweepResult:
    """Worst weak-type (2,2) ratio per direction count over a shared set
    of trial draws (same f, w, t face every N), plus the fitted growth of
    the squared worst ratio in log N."""
    Ns = tuple(int(n) for n in Ns)
    if len(Ns) == 0:
        raise ValueError("need at least one direction count")
    if any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise ValueError(f"direction counts must be strictly increasing: {Ns}")
    evaluators = {n: shared_evaluator(side, n) for n in Ns}

    def one_trial(index: int) -> list[float]:
        pair = (seed, index)
        rng = np.random.default_rng(list(pair))
        f, fd, w, wd = sample_zoo_pair(rng, side)
        t = sample_threshold(rng, f)
        return [
            verify_thm14(f, w, t, n, evaluators[n], pair,
                         {"function": fd, "weight": wd, "trial": index}).ratio
            for n in Ns
        ]

    threads = thread_count() if threads is None else threads
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one_trial, range(trials)))
    else:
        rows = [one_trial(i) for i in range(trials)]
    worst = tuple(max(row[j] for row in rows) for j in range(len(Ns)))
    slope, intercept, r2 = fit_log_slope(Ns, worst)
    return SweepResult(Ns, worst, slope, intercept, r2, trials, side, seed)


# --- ratio search for the strong-operator analogue ---------------------------


def problem11_ratio_search(budget: int, seed: int,
                           side: int = 32) -> InequalityReport:
    """Random restarts plus greedy hill-climbing over (f, w, t, p),
    maximizing the weighted superlevel/strong-weight ratio. Purely
    empirical: reports the best ratio found within the evaluation budget."""
    if budget < 1:
        raise ValueError(f"budget must be positive, got {budget}")
    rng = np.random.default_rng([seed])

    def fresh():
        f, fd, w, wd = sample_zoo_pair(rng, side)
        t = sample_threshold(rng, f)
        p = 1.0 if rng.random() < 0.5 else float(rng.uniform(1.0, 4.0))
        return {"f": f, "w": w, "t": t, "p": p,
                "fd": f"{fd}+perturb0", "wd": f"{wd}+perturb0",
                "msf": strong_maximal(f).values.cells,
                "mrw": strong_maximal(w).values.cells}

    def measure(state, index):
        return problem11_report(
            state["f"], state["w"], state["t"], state["p"], (seed, index),
            {"function": state["fd"], "weight": state["wd"],
             "budget": budget, "evaluation": index},
            msf=state["msf"], mrw=state["mrw"])

    def bump(desc: str) -> str:
        head, _, n = desc.rpartition("+perturb")
        return f"{head}+perturb{int(n) + 1}"

    cur = fresh()
    cur_report = measure(cur, 0)
    best = cur_report
    for index in range(1, budget):
        move = int(rng.integers(0, 5))
        cand = dict(cur)
        if move == 0:
            cand["t"] = max(cur["t"] * float(np.exp(rng.normal(0.0, 0.4))),
                            1e-12)
        elif move == 1:
            cand["p"] = float(min(max(cur["p"] + rng.normal(0.0, 0.3), 1.0),
                                  6.0))
        elif move == 2:
            cells = cur["w"].cells.copy()
            y, x = rng.integers(0, side, 2)
            cells[y, x] *= float(4.0 ** rng.standard_normal())
            cand["w"] = Grid2D(cells)
            cand["wd"] = bump(cur["wd"])
            cand["mrw"] = strong_maximal(cand["w"]).values.cells
        elif move == 3:
            cells = cur["f"].cells.copy()
            y, x = rng.integers(0, side, 2)
            cells[y, x] *= float(4.0 ** rng.standard_normal())
            cand["f"] = Grid2D(cells)
            cand["fd"] = bump(cur["fd"])
            cand["msf"] = strong_maximal(cand["f"]).values.cells
        else:
            cand = fresh()
        cand_report = measure(cand, index)
        if cand_report.ratio >= cur_report.ratio or move == 4:
            cur, cur_report = cand, cand_report
        if cand_report.ratio > best.ratio:
            best = cand_report
    return best


# --- serialization and baselines ---------------------------------------------


def write_reports_jsonl(reports: list[InequalityReport], path) -> None:
    with open(path, "w") as fh:
        for r in reports:
            fh.write(json.dumps(r.to_json_dict(), sort_keys=True))
            fh.write("\n")


def _csv_cell(v) -> str:
    if isinstance(v, float):
        return format_number(v)
    return "" if v is None else str(v)


def write_suite_csv(suite: SuiteResult, path) -> None:
    """One row per trial with the aggregate columns repeated, preceded by
    key=value comment lines carrying the suite parameters."""
    keys = sorted({k for r in suite.reports for k in r.params})
    with open(path, "w") as fh:
        for k, v in sorted(suite.to_json_dict().items()):
            fh.write(f"# {k}={_csv_cell(v)}\n")
        cols = ["tag", *keys, "lhs", "rhs", "ratio",
                "worst_ratio", "mean_ratio", "trials"]
        fh.write(",".join(cols) + "\n")
        worst = _csv_cell(suite.worst_ratio)
        mean = _csv_cell(suite.mean_ratio)
        for r in suite.reports:
            row = [r.tag, *(_csv_cell(r.params.get(k)) for k in keys),
                   _csv_cell(r.lhs), _csv_cell(r.rhs), _csv_cell(r.ratio),
                   worst, mean, str(suite.trials)]
            fh.write(",".join(row) + "\n")


def _baselines_path() -> Path:
    return Path(__file__).parent / "data" / "baselines.json"


def load_baselines() -> dict:
    path = _baselines_path()
    if not path.exists():
        return {}
    with open(path) as fh:
        return json.load(fh)


def baseline_key(tag: str, side: int, trials: int, seed: int, **extra) -> str:
    parts = [tag, f"side={side}", f"trials={trials}", f"seed={seed}"]
    parts += [f"{k}={v}" for k, v in sorted(extra.items())]
    return "|".join(parts)


def check_baseline(key: str, value: float, tol: float = 1e-9):
    """Returns (status, stored): 'ok' within tolerance, 'regression' when
    the value exceeds the stored baseline, 'missing' when unrecorded."""
    stored = load_baselines().get(key)
    if stored is None:
        return "missing", None
    if value <= stored + tol:
        return "ok", stored
    return "regression", stored


def record_baselines(entries: dict) -> Path:
    path = _baselines_path()
    path.parent.mkdir(parents=True, exist_ok=True)
    merged = load_baselines()
    merged.update(entries)
    with open(path, "w") as fh:
        json.dump(merged, fh, sort_keys=True, indent=1)
        fh.write("\n")
    return path
