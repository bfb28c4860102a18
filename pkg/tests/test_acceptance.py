"""Acceptance gate: each test covers one release criterion and prints a
single PASS/FAIL line for it. Budgets are wall-clock upper bounds."""

import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from maxlab.covering import (
    check_directional_certificates,
    check_covering_inclusion,
    check_dyadic_certificates,
    check_lemma31,
    multiplicity_bound_check,
    random_directional_family,
    random_dyadic_family,
    random_lemma31_instance,
    select_directional,
    select_dyadic,
)
from maxlab.experiments import (
    baseline_key,
    check_baseline,
    run_suite,
    sweep_directions,
    verify_cor13,
    verify_cor15,
    verify_fs_classical,
    verify_thm12,
    verify_thm14,
)
from maxlab.grids import Grid2D
from maxlab.maximal import hl_maximal, strong_maximal
from maxlab.reference import reference_hl, reference_strong

SEED = 2025
SIDE = 32
TRIALS = 1000


def _report(name: str, ok: bool, detail: str) -> None:
    # bypass capture so the per-criterion verdict always reaches the console
    print(f"[ACCEPT] {name}: {'PASS' if ok else 'FAIL'} ({detail})",
          file=sys.__stdout__)


def test_oracle_equivalence():
    t0 = time.monotonic()
    rng = np.random.default_rng(SEED)
    mismatches = 0
    for i in range(200):
        side = (2, 4, 8, 16)[i % 4]
        g = Grid2D(rng.integers(0, 100, (side, side)).astype(np.int64))
        for fast, slow in (
            (hl_maximal(g, exact=True).values, reference_hl(g)),
            (hl_maximal(g, dyadic=True, exact=True).values, reference_hl(g, dyadic=True)),
            (strong_maximal(g, exact=True).values, reference_strong(g)),
        ):
            if not (fast.cells == slow.cells).all():
                mismatches += 1
    dt = time.monotonic() - t0
    ok = mismatches == 0 and dt < 60.0
    _report("oracle-equivalence", ok,
            f"200 grids x 3 operators, {mismatches} mismatches, {dt:.1f}s")
    assert mismatches == 0
    assert dt < 60.0


def test_covering_dyadic_suite():
    t0 = time.monotonic()
    rng = np.random.default_rng(SEED + 1)
    failures = []
    for i in range(200):
        side = (16, 32, 64, 64)[i % 4]
        count = int(rng.integers(1, 201))
        fam = random_dyadic_family(rng, side=side, count=count)
        sel = select_dyadic(fam, side=side)
        for rep in (check_dyadic_certificates(sel),
                    multiplicity_bound_check(sel),
                    check_covering_inclusion(sel)):
            if not rep.ok:
                failures.append((i, rep.name, rep.detail))
    dt = time.monotonic() - t0
    ok = not failures and dt < 300.0
    _report("covering-dyadic-suite", ok,
            f"200 families, {len(failures)} failures, {dt:.1f}s")
    assert failures == []
    assert dt < 300.0


def _mc_overlap_check(sel, rng) -> bool:
    """3-sigma sampling cross-check of one traced overlap sum."""
    cand = [e for e in sel.overlap_trace if e.overlap_sum > 0]
    if not cand:
        return True
    e = cand[int(rng.integers(0, len(cand)))]
    r = sel.input[e.index]
    prior = [sel.input[k] for k in sel.selected if k < e.index]
    n = 200_000
    u, v = r.axes()
    offs = rng.uniform(-0.5, 0.5, (n, 2))
    pts = np.asarray(r.center) + offs[:, :1] * r.length * u + offs[:, 1:] * r.width * v
    est, var = 0.0, 0.0
    for q in prior:
        p = q.contains_points(pts).mean()
        est += r.area * p
        var += (r.area ** 2) * p * (1 - p) / n
    return abs(e.overlap_sum - est) <= max(3 * math.sqrt(var), 1e-9)


def test_covering_directional_suite():
    t0 = time.monotonic()
    rng = np.random.default_rng(SEED + 2)
    failures = []
    mc_checked = 0
    for i in range(100):
        n = (16, 32, 64)[i % 3]
        fam = random_directional_family(rng, n_directions=n, side=32,
                                        count=int(rng.integers(5, 30)))
        sel = select_directional(fam)
        rep = check_directional_certificates(sel)
        if not rep.ok:
            failures.append((i, "certificates", rep.detail))
        if i % 20 == 0:  # 5 percent of cases get a sampling cross-check
            mc_checked += 1
            if not _mc_overlap_check(sel, rng):
                failures.append((i, "mc-overlap", "outside 3 sigma"))

    lemma_pass = 0
    attempts = 0
    while lemma_pass < 500 and attempts < 5000:
        attempts += 1
        n = (16, 32, 64)[attempts % 3]
        inst = random_lemma31_instance(rng, n)
        rep = check_lemma31(inst)
        if rep.status == "hypothesis-not-met":
            continue
        if rep.status == "fail":
            failures.append(("lemma", attempts, rep.detail))
        lemma_pass += 1
    dt = time.monotonic() - t0
    ok = not failures and lemma_pass == 500 and dt < 300.0
    _report("covering-directional-suite", ok,
            f"100 families + {lemma_pass} lemma instances, "
            f"{mc_checked} sampled cross-checks, {len(failures)} failures, {dt:.1f}s")
    assert failures == []
    assert lemma_pass == 500
    assert dt < 300.0


@pytest.mark.parametrize("tag", ["fs", "thm12", "cor13", "thm14", "cor15"])
def test_inequality_suite_baselines(tag):
    suite = run_suite(tag, trials=TRIALS, side=SIDE, seed=SEED)
    worst = suite.worst_ratio
    key = baseline_key(tag, SIDE, TRIALS, SEED)
    status, stored = check_baseline(key, worst)
    ok = math.isfinite(worst) and status == "ok"
    _report(f"inequality-suite-{tag}", ok,
            f"worst_ratio={worst:.9g} baseline={status}"
            + (f" (stored {stored:.9g})" if stored is not None else ""))
    assert math.isfinite(worst)
    assert status == "ok", (
        f"baseline {key} is {status}; regenerate with "
        f"`maxlab verify {tag} --trials {TRIALS} --grid {SIDE} --seed {SEED} "
        f"--write-baselines`")


def test_sweep_logn():
    t0 = time.monotonic()
    res = sweep_directions(Ns=(16, 32, 64, 128), trials=50, side=SIDE, seed=SEED)
    dt = time.monotonic() - t0
    key = baseline_key("sweep", SIDE, 50, SEED, Ns="16,32,64,128")
    status, stored = check_baseline(key, max(res.normalized_constants))
    ok = (res.slope is not None and res.slope >= -1e-12
          and status == "ok" and dt < 1800.0)
    _report("sweep-logn", ok,
            f"slope={res.slope:.6g} r2={res.r_squared:.4f} "
            f"max_normalized={max(res.normalized_constants):.9g} "
            f"baseline={status}, {dt:.1f}s")
    assert res.slope is not None and res.slope >= -1e-12
    assert status == "ok", f"baseline {key} is {status}"
    assert dt < 1800.0


def test_analytic_spot_values():
    side = 32
    f = Grid2D.constant(side, 1.0)
    w = Grid2D.constant(side, 1.0)
    cases = [
        ("fs", verify_fs_classical(f, w, 0.5).ratio, 0.5),
        ("thm12", verify_thm12(f, w, 0.5).ratio, 1.0 / (2.0 * (1.0 + math.log(2.0)))),
        ("cor13", verify_cor13(f, w, 2.0).ratio, 1.0),
        ("thm14", verify_thm14(f, w, 0.5, 16).ratio, 0.5),
        ("cor15", verify_cor15(f, w, 4.0, 16).ratio, math.log(16.0) ** -0.25),
    ]
    bad = [(tag, got, want) for tag, got, want in cases
           if abs(got - want) > 1e-12 * abs(want)]
    _report("analytic-spot-values", not bad,
            "5 constant-input ratios at 12 significant digits")
    assert bad == []


def test_determinism_byte_identical(tmp_path):
    env_cmds = [
        ["verify", "thm12", "--trials", "5", "--grid", "8", "--seed", "21",
         "--out-prefix", None, "--no-figures"],
        ["covering", "--mode", "dyadic", "--random", "12", "--seed", "4",
         "--out", None],
        ["sweep-n", "--Ns", "16,32", "--trials", "2", "--grid", "8",
         "--seed", "13", "--out-prefix", None, "--no-figures"],
    ]
    suffixes = [".jsonl", "", ".json"]
    all_ok = True
    for cmd, suffix in zip(env_cmds, suffixes):
        outs = []
        for run in range(2):
            target = tmp_path / f"{cmd[0]}_{run}"
            full = [str(target) if a is None else a for a in cmd]
            res = subprocess.run(
                [sys.executable, "-m", "maxlab.cli", *full],
                capture_output=True, text=True)
            assert res.returncode == 0, res.stderr
            outs.append((tmp_path / f"{cmd[0]}_{run}{suffix}").read_bytes()
                        if suffix else target.read_bytes())
        all_ok = all_ok and outs[0] == outs[1]
        assert outs[0] == outs[1], f"{cmd[0]} rerun differed"
    _report("determinism", all_ok, "3 randomized commands byte-identical on rerun")
