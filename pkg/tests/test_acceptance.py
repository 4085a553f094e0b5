"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines.  Tolerances and workloads are pinned here; statistical checks use
fixed master seeds and 3-standard-error bands.
"""

import json
import math
import time

import numpy as np
from scipy import stats

from lvjumps import (
    coarsen_path,
    constant_model,
    estimate_moment,
    explicit_logistic,
    invariant_distance,
    inverse_moment_check,
    coupling_contraction,
    sample_driving_path,
    sample_lyapunov_mc,
    simulate_lower,
    simulate_system,
    simulate_upper,
)
from lvjumps.analysis import derive_path_seed, dkw_epsilon, lyapunov_functional_mc
from lvjumps.cli import main as cli_main
from conftest import random_valid_model, random_x0

BENCHMARK = dict(a=1.0, b=1.0, sigma=0.5, gamma=-0.5, weights=(1.0,))
EXTINCT = dict(a=0.1, b=1.0, sigma=1.0, gamma=-0.5, weights=(1.0,))
PERMANENT = dict(a=2.0, b=1.0, sigma=1.0, gamma=0.5, weights=(1.0,))

EXTINCTION_RATE = 0.1 - 0.5 - (math.log(2.0) - 0.5)  # = -0.593147...
PERMANENCE_MARGIN = 2.0 - 1.0 - 0.25 / 1.5  # = 0.833333...


def report(name, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def test_01_oracle_equivalence_and_strong_order():
    model = constant_model(1, **BENCHMARK)
    t0 = time.perf_counter()
    n_paths = 200
    factors = [2**k for k in range(7)]  # h = 2^-12 ... 2^-6
    errors = np.zeros((n_paths, len(factors)))
    for j in range(n_paths):
        fine = sample_driving_path(model.marks, 5.0, 2.0**-12, derive_path_seed(101, j))
        oracle_T = explicit_logistic(model, 0, 1.0, fine).final()
        for fi, factor in enumerate(factors):
            path = coarsen_path(fine, factor)
            sim_T = simulate_upper(model, 0, 1.0, path).values[0, -1]
            errors[j, fi] = abs(sim_T - oracle_T) / oracle_T
    mean_err = errors.mean(axis=0)
    hs = [2.0**-12 * f for f in factors]
    slope = stats.linregress(np.log(hs), np.log(mean_err)).slope
    elapsed = time.perf_counter() - t0
    ok = mean_err[0] < 1e-2 and slope >= 0.45 and elapsed < 60.0
    report(
        "criterion 1 (oracle equivalence)",
        ok,
        f"mean rel err at h=2^-12: {mean_err[0]:.2e} (< 1e-2), "
        f"order: {slope:.2f} (>= 0.45), runtime {elapsed:.1f}s (< 60s)",
    )


def test_02_pathwise_sandwich_zero_violations():
    t0 = time.perf_counter()
    rng = np.random.default_rng(202)
    violations = 0
    models = 0
    while models < 200:
        model = random_valid_model(rng, max_n=4)
        x0 = random_x0(rng, model.n)
        path = sample_driving_path(
            model.marks, 5.0, 2.0**-10, int(rng.integers(1 << 62)),
            extra_times=tuple(b for b in model.pwc_breakpoints() if 0 < b < 5.0),
        )
        full = simulate_system(model, x0, path)
        if full.diverged:
            continue
        uppers = [simulate_upper(model, i, x0[i], path) for i in range(model.n)]
        lowers = [simulate_lower(model, i, x0[i], path, uppers) for i in range(model.n)]
        for i in range(model.n):
            violations += int(np.sum(full.values[i] > uppers[i].values[0]))
            violations += int(np.sum(lowers[i].values[0] > full.values[i]))
        models += 1
    elapsed = time.perf_counter() - t0
    ok = violations == 0 and elapsed < 120.0
    report(
        "criterion 2 (comparison sandwich)",
        ok,
        f"{violations} violations over 200 models (=0), runtime {elapsed:.1f}s (< 120s)",
    )


def test_03_deterministic_limit():
    h, T = 1e-4, 5.0
    model = constant_model(1, a=1.0, b=1.0, sigma=0.0)
    path = sample_driving_path(model.marks, T, h, 303)

    # equilibrium start: the scheme reproduces the constant solution
    traj = simulate_system(model, [1.0], path)
    sim_err = float(np.max(np.abs(traj.values[0] - 1.0)))

    # generic start: the closed form against the analytic logistic solution
    x0 = 0.5
    t = np.asarray(explicit_logistic(model, 0, x0, path).grid.slot_times)
    exact = x0 * np.exp(t) / (1.0 + x0 * (np.exp(t) - 1.0))
    oracle = explicit_logistic(model, 0, x0, path).values
    oracle_err = float(np.max(np.abs(oracle - exact) / exact))

    # generic-start scheme error stays at the O(h) scale
    sim2 = simulate_system(model, [x0], path)
    sim2_err = float(np.max(np.abs(sim2.values[0] - exact) / exact))

    ok = sim_err < 1e-6 and oracle_err < 1e-6 and sim2_err < 10 * h
    report(
        "criterion 3 (deterministic limit)",
        ok,
        f"scheme at equilibrium: {sim_err:.1e}, closed form: {oracle_err:.1e} "
        f"(both < 1e-6); generic-start scheme: {sim2_err:.1e} (< 10h)",
    )


def test_04_extinction_exponent():
    model = constant_model(1, **EXTINCT)
    t0 = time.perf_counter()
    mc = sample_lyapunov_mc(model, 0, 1.0, 400.0, 2.0**-6, 1000, 404, checkpoint_count=100)
    elapsed = time.perf_counter() - t0
    mean_T = mc.over_t.mean[-1]
    se_T = mc.over_t.std_error[-1]
    gap = abs(mean_T - EXTINCTION_RATE)
    frac_extinct = float(np.mean(mc.final_values < 1e-6))
    lnlnt_ok = float(np.mean(np.log(mc.final_values) / math.log(400.0) <= 1.1))
    ok = gap <= 3 * se_T and frac_extinct >= 0.99 and lnlnt_ok >= 0.99 and elapsed < 300.0
    report(
        "criterion 4 (extinction exponent)",
        ok,
        f"mean ln Y(400)/400 = {mean_T:.4f} vs {EXTINCTION_RATE:.4f} "
        f"(gap {gap:.2e} <= 3se={3 * se_T:.2e}); "
        f"Y(400)<1e-6 on {100 * frac_extinct:.1f}% (>= 99%), "
        f"ln Y/ln t <= 1.1 on {100 * lnlnt_ok:.1f}%, "
        f"runtime {elapsed:.0f}s (< 300s)",
    )


def test_05_zero_exponent():
    model = constant_model(1, **PERMANENT)
    mc = sample_lyapunov_mc(model, 0, 1.0, 400.0, 2.0**-6, 1000, 505, checkpoint_count=100)
    times = mc.over_t.checkpoints
    at_100 = abs(mc.over_t.mean[np.flatnonzero(times == 100.0)[0]])
    at_400 = abs(mc.over_t.mean[-1])
    # hypothesis-side sanity: ln Y / ln t stays below 1 + 0.1 on nearly all paths
    lnlnt_ok = float(np.mean(np.log(mc.final_values) / math.log(400.0) <= 1.1))
    ok = at_400 < 0.05 and at_400 < at_100 and lnlnt_ok >= 0.99
    report(
        "criterion 5 (zero exponent)",
        ok,
        f"|mean ln Y(400)/400| = {at_400:.4f} (< 0.05) and < |at T=100| = {at_100:.4f}; "
        f"ln Y/ln t <= 1.1 on {100 * lnlnt_ok:.1f}% of paths",
    )


def test_06_coupling_contraction():
    model = constant_model(1, **PERMANENT)
    res = coupling_contraction(model, 0, 0.5, 2.0, 20.0, 2.0**-6, 5000, 606)
    ok = (
        res.all_ok
        and res.sign_consistent_fraction == 1.0
        and res.inverse_diff.mean[0] > 0
    )
    worst = float(np.max(res.inverse_diff.mean - res.envelope - 3 * res.inverse_diff.std_error))
    report(
        "criterion 6 (coupling contraction)",
        ok,
        f"mean |1/Yx - 1/Yy| within 1.5*exp(-{PERMANENCE_MARGIN:.4f} t) + 3se at all "
        f"{len(res.envelope)} checkpoints (worst slack {worst:.2e}); "
        f"no sign reversal on {100 * res.sign_consistent_fraction:.1f}% of paths",
    )


def test_07_inverse_moment_bound():
    model = constant_model(1, **PERMANENT)
    res = inverse_moment_check(model, 0, 1.0, 20.0, 2.0**-6, 5000, 707)
    worst = float(np.max(res.series.mean - 3 * res.series.std_error - res.bound))
    ok = res.all_ok
    report(
        "criterion 7 (inverse-moment bound)",
        ok,
        f"mean - 3se <= analytic bound at all {len(res.bound)} checkpoints "
        f"(worst excess {worst:.2e})",
    )


def test_08_moment_boundedness():
    model = constant_model(1, **BENCHMARK)
    details = []
    ok = True
    for p in (0.5, 2.0):
        series = estimate_moment(model, [1.0], p, 50.0, 2.0**-6, 2000, 808)
        early = series.mean[series.checkpoints <= 25.0]
        late = series.mean[series.checkpoints >= 25.0]
        this_ok = late.mean() <= 1.2 * early.max()
        ok = ok and this_ok
        details.append(
            f"p={p:g}: late mean {late.mean():.4f} <= 1.2 x early max {early.max():.4f}"
        )
    report("criterion 8 (moment boundedness)", ok, "; ".join(details))


def test_09_growth_functional_bound():
    model = constant_model(
        2,
        a=(1.5, 1.0),
        b=[[1.0, 0.3], [0.2, 0.8]],
        sigma=(0.5, 0.4),
        gamma=((0.3,), (-0.4,)),
        weights=(1.0,),
    )
    res = lyapunov_functional_mc(model, [1.0, 1.0], 200.0, 2.0**-6, 1000, 909)
    ok = res.mean <= res.bound + 3 * res.std_error and res.diverged_count == 0
    report(
        "criterion 9 (growth functional)",
        ok,
        f"functional mean {res.mean:.4f} <= max growth sup {res.bound:.4f} "
        f"+ 3se ({3 * res.std_error:.1e})",
    )


def test_10_invariant_measure_proxy():
    model = constant_model(1, **PERMANENT)
    res = invariant_distance(model, 0, 0.5, 2.0, 50.0, 2.0**-6, 10_000, 1010)
    floor = 2 * dkw_epsilon(10_000) + 0.02
    ok = res.distance <= floor
    report(
        "criterion 10 (invariant measure proxy)",
        ok,
        f"Kolmogorov distance {res.distance:.4f} <= sampling floor {floor:.4f}",
    )


def test_11_regime_boundary_sweep(tmp_path):
    payload = {
        "n": 1,
        "a": [{"type": "const", "c": 1.0}],
        "B": [[{"type": "const", "c": 1.0}]],
        "sigma": [{"type": "const", "c": 1.0}],
        "marks": {"weights": [1.0]},
        "gamma": [[{"type": "const", "c": -0.5}]],
    }
    f = tmp_path / "model.json"
    f.write_text(json.dumps(payload))
    out = tmp_path / "sweep"
    code = cli_main(
        ["sweep", "--model", str(f), "--out", str(out), "--param", "a[0]",
         "--grid", "0.1:2.0:0.1"]
    )
    assert code == 0
    rows = (out / "sweep.csv").read_text().strip().splitlines()[1:]
    flips = []
    prev = None
    for row in rows:
        cols = row.split(",")
        value, label = float(cols[1]), cols[3]
        extinct = label == "EXTINCT"
        if prev is not None and prev[1] != extinct:
            flips.append((prev[0], value))
        prev = (value, extinct)
    boundary = 0.5 + (math.log(2.0) - 0.5)
    ok = len(flips) == 1 and flips[0][0] < boundary < flips[0][1] + 1e-12
    report(
        "criterion 11 (regime boundary)",
        ok,
        f"dying/surviving flip inside ({flips[0][0]:.1f}, {flips[0][1]:.1f}] around "
        f"{boundary:.6f} with grid step 0.1",
    )


def test_12_rerun_determinism(tmp_path):
    payload = {
        "n": 1,
        "a": [{"type": "const", "c": 2.0}],
        "B": [[{"type": "const", "c": 1.0}]],
        "sigma": [{"type": "const", "c": 1.0}],
        "marks": {"weights": [1.0]},
        "gamma": [[{"type": "const", "c": 0.5}]],
    }
    f = tmp_path / "model.json"
    f.write_text(json.dumps(payload))
    commands = [
        ["validate", "--model", str(f)],
        ["simulate", "--model", str(f), "--T", "2.0", "--h", str(2.0**-8),
         "--seed", "12", "--with-bounds", "--with-oracle", "--dump-path"],
        ["analyze", "moments", "--model", str(f), "--T", "2.0", "--h", "0.125",
         "--paths", "20", "--seed", "12"],
        ["analyze", "couple", "--model", str(f), "--T", "2.0", "--h", "0.125",
         "--paths", "20", "--seed", "12", "--x", "0.5", "--y", "2.0"],
        ["analyze", "inverse-moment", "--model", str(f), "--T", "2.0", "--h", "0.125",
         "--paths", "20", "--seed", "12"],
        ["analyze", "invariant", "--model", str(f), "--T", "2.0", "--h", "0.125",
         "--paths", "50", "--seed", "12", "--x", "0.5", "--y", "2.0"],
        ["analyze", "lyapunov", "--model", str(f), "--T", "4.0", "--h", "0.125",
         "--paths", "20", "--seed", "12"],
        ["classify", "--model", str(f)],
        ["sweep", "--model", str(f), "--param", "a[0]", "--grid", "0.5:1.5:0.25"],
    ]
    mismatches = []
    for k, args in enumerate(commands):
        out1, out2 = tmp_path / f"a{k}", tmp_path / f"b{k}"
        c1 = cli_main(args + ["--out", str(out1)])
        c2 = cli_main(args + ["--out", str(out2)])
        files1 = {p.name: p.read_bytes() for p in sorted(out1.iterdir())}
        files2 = {p.name: p.read_bytes() for p in sorted(out2.iterdir())}
        if c1 != c2 or files1 != files2:
            mismatches.append(args[0])
    ok = not mismatches
    report(
        "criterion 12 (rerun determinism)",
        ok,
        f"{len(commands)} command invocations byte-identical on rerun"
        + (f"; mismatches: {mismatches}" if mismatches else ""),
    )
