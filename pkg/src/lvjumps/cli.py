"""Command-line front end.

Commands: ``validate | simulate | analyze | classify | sweep``.  Every command
is a pure function of its config file and flags: reruns with the same inputs
produce byte-identical outputs (floats are rendered with 17 significant
digits, JSON layout is fixed, nothing timestamps).

Exit codes:
    0  ok
    1  model invariant violation
    2  bad input (malformed JSON, unknown field, bad grids)
    3  a simulated path diverged
    4  numeric/oracle mismatch beyond the configured tolerance
    5  an analysis prerequisite (analytic hypothesis) is unmet
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import analysis as an
from .closedform import explicit_logistic
from .conditions import compute_regime_report
from .errors import (
    ConfigurationError,
    DomainError,
    LVJumpsError,
    ModelFormatError,
    PrerequisiteError,
)
from .integrate import (
    format_float,
    simulate_lower,
    simulate_system,
    simulate_upper,
    write_trajectory_csv,
)
from .model import ModelSpec, load_model, model_from_payload, model_to_payload, validate_model
from .noise import sample_driving_path, save_path

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_BAD_INPUT = 2
EXIT_DIVERGED = 3
EXIT_ORACLE = 4
EXIT_PREREQUISITE = 5


def _write_json(path: Path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load(args) -> ModelSpec:
    return load_model(args.model)


def _x0_list(args, n) -> list[float]:
    if args.x0 is None:
        return [1.0] * n
    vals = [float(v) for v in args.x0.split(",")]
    if len(vals) == 1 and n > 1:
        vals = vals * n
    if len(vals) != n:
        raise ConfigurationError(f"--x0 needs {n} comma-separated values")
    if any(not math.isfinite(v) or v <= 0 for v in vals):
        raise ConfigurationError("--x0 values must be positive finite")
    return vals


def cmd_validate(args) -> int:
    out = _outdir(args)
    model = _load(args)
    report = validate_model(model)
    _write_json(out / "validation.json", report.to_payload())
    print(f"wrote {out / 'validation.json'}: {report}")
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_simulate(args) -> int:
    out = _outdir(args)
    model = _load(args)
    report = validate_model(model)
    if not report.ok:
        _write_json(out / "validation.json", report.to_payload())
        print(f"model invalid: {report}")
        return EXIT_INVALID
    x0 = _x0_list(args, model.n)
    extra = tuple(b for b in model.pwc_breakpoints() if 0 < b < args.T)
    path = sample_driving_path(model.marks, args.T, args.h, args.seed, extra_times=extra)
    if args.dump_path:
        save_path(path, out / "path.bin")
    traj = simulate_system(model, x0, path)
    with open(out / "trajectory_X.csv", "w", encoding="utf-8") as fh:
        write_trajectory_csv(traj, fh)
    status = EXIT_OK
    if traj.diverged:
        print(f"path diverged at t={traj.diverged_at:g}; partial CSV retained")
        status = EXIT_DIVERGED

    if args.with_bounds and not traj.diverged:
        uppers = [simulate_upper(model, i, x0[i], path) for i in range(model.n)]
        lowers = [simulate_lower(model, i, x0[i], path, uppers) for i in range(model.n)]
        for i in range(model.n):
            with open(out / f"trajectory_Y_{i + 1}.csv", "w", encoding="utf-8") as fh:
                write_trajectory_csv(uppers[i], fh, header_names=[f"Y_{i + 1}"])
            with open(out / f"trajectory_Z_{i + 1}.csv", "w", encoding="utf-8") as fh:
                write_trajectory_csv(lowers[i], fh, header_names=[f"Z_{i + 1}"])
        upper_excess = max(
            float(np.max(traj.values[i] - uppers[i].values[0])) for i in range(model.n)
        )
        lower_excess = max(
            float(np.max(lowers[i].values[0] - traj.values[i])) for i in range(model.n)
        )
        violations = sum(
            int(np.sum(traj.values[i] > uppers[i].values[0]))
            + int(np.sum(lowers[i].values[0] > traj.values[i]))
            for i in range(model.n)
        )
        _write_json(
            out / "bounds_summary.json",
            {
                "max_upper_excess": upper_excess,
                "max_lower_excess": lower_excess,
                "violations": violations,
            },
        )
        print(f"sandwich violations: {violations}")

    if args.with_oracle and not traj.diverged:
        if model.n != 1:
            raise ConfigurationError("--with-oracle applies to 1-species models")
        oracle = explicit_logistic(model, 0, x0[0], path)
        with open(out / "oracle.csv", "w", encoding="utf-8") as fh:
            fh.write("time,slot_kind,oracle\n")
            from .noise import KIND_LABELS

            for s in range(oracle.grid.n_slots):
                fh.write(
                    format_float(oracle.grid.slot_times[s])
                    + ","
                    + KIND_LABELS[oracle.grid.slot_kinds[s]]
                    + ","
                    + format_float(oracle.values[s])
                    + "\n"
                )
        gap = float(np.max(np.abs(traj.values[0] - oracle.values) / oracle.values))
        _write_json(
            out / "oracle_summary.json",
            {"max_relative_gap": gap, "tolerance": args.oracle_tol},
        )
        print(f"max relative gap to closed form: {gap:g}")
        if gap > args.oracle_tol:
            return EXIT_ORACLE
    return status


def cmd_analyze(args) -> int:
    out = _outdir(args)
    model = _load(args)
    report = validate_model(model)
    if not report.ok:
        print(f"model invalid: {report}")
        return EXIT_INVALID
    x0 = _x0_list(args, model.n)
    if args.paths < 1:
        raise ConfigurationError("--paths must be >= 1")
    i = args.species
    if not (0 <= i < model.n):
        raise ConfigurationError(f"--species must be in [0, {model.n})")
    which = args.which
    verdict: dict
    if which == "moments":
        series = an.estimate_moment(
            model, x0, args.p, args.T, args.h, args.paths, args.seed,
            checkpoint_count=args.checkpoints,
        )
        with open(out / f"moments_p{args.p:g}.csv", "w", encoding="utf-8") as fh:
            an.write_mc_csv(series, fh)
        early = series.mean[series.checkpoints <= args.T / 2]
        late = series.mean[series.checkpoints >= args.T / 2]
        bounded = bool(late.mean() <= 1.2 * early.max())
        verdict = {
            "which": which,
            "p": args.p,
            "bounded": bounded,
            "early_window_max": float(early.max()),
            "late_window_mean": float(late.mean()),
            "diverged": series.diverged_count,
            "pass": bounded,
        }
    elif which == "lyapunov":
        mc = an.sample_lyapunov_mc(
            model, i, x0[i], args.T, args.h, args.paths, args.seed,
            checkpoint_count=args.checkpoints,
        )
        with open(out / "lyapunov_over_t.csv", "w", encoding="utf-8") as fh:
            an.write_mc_csv(mc.over_t, fh)
        func = an.lyapunov_functional_mc(model, x0, args.T, args.h, args.paths, args.seed)
        final_exponent = float(mc.over_t.mean[-1])
        verdict = {
            "which": which,
            "species": i,
            "final_log_over_t_mean": final_exponent,
            "final_log_over_t_se": float(mc.over_t.std_error[-1]),
            "functional_mean": func.mean,
            "functional_bound": func.bound,
            "functional_within_bound": func.within_bound,
            "pass": func.within_bound,
        }
    elif which == "inverse-moment":
        res = an.inverse_moment_check(
            model, i, x0[i], args.T, args.h, args.paths, args.seed,
            checkpoint_count=args.checkpoints,
        )
        with open(out / "inverse_moment.csv", "w", encoding="utf-8") as fh:
            an.write_mc_csv(res.series, fh, bound=res.bound, flags=res.ok)
        verdict = {"which": which, "species": i, "all_within_bound": res.all_ok,
                   "pass": res.all_ok}
    elif which == "couple":
        res = an.coupling_contraction(
            model, i, args.x, args.y, args.T, args.h, args.paths, args.seed,
            checkpoint_count=args.checkpoints,
        )
        with open(out / "coupling_inverse_diff.csv", "w", encoding="utf-8") as fh:
            an.write_mc_csv(res.inverse_diff, fh, bound=res.envelope, flags=res.ok)
        with open(out / "coupling_half_moment.csv", "w", encoding="utf-8") as fh:
            an.write_mc_csv(res.half_moment_diff, fh)
        ok = res.all_ok and res.sign_consistent_fraction == 1.0
        verdict = {
            "which": which,
            "species": i,
            "x": args.x,
            "y": args.y,
            "all_within_envelope": res.all_ok,
            "sign_consistent_fraction": res.sign_consistent_fraction,
            "pass": ok,
        }
    elif which == "invariant":
        res = an.invariant_distance(
            model, i, args.x, args.y, args.T, args.h, args.paths, args.seed
        )
        verdict = {
            "which": which,
            "species": i,
            "x": args.x,
            "y": args.y,
            "distance": res.distance,
            "sampling_floor": res.sampling_floor,
            "pass": res.within_floor,
        }
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigurationError(f"unknown analysis {which!r}")
    _write_json(out / f"analyze_{which}.json", verdict)
    print(f"{which}: {'pass' if verdict['pass'] else 'FAIL'}")
    return EXIT_OK


def cmd_classify(args) -> int:
    out = _outdir(args)
    model = _load(args)
    p_list = tuple(float(p) for p in args.p_list.split(",")) if args.p_list else (2.0,)
    report = compute_regime_report(model, p_list=p_list)
    _write_json(out / "classification.json", report.to_payload())
    print(
        f"wrote {out / 'classification.json'}: "
        + ", ".join(report.classifications())
    )
    return EXIT_OK


_SWEEP_FIELDS = ("a", "sigma", "B", "gamma", "weights")


def _parse_target(target: str):
    name = target.split("[", 1)[0]
    if name not in _SWEEP_FIELDS:
        raise ConfigurationError(
            f"sweep target must be one of {_SWEEP_FIELDS}, got {target!r}"
        )
    idx = [int(p.rstrip("]")) for p in target.split("[")[1:]]
    expected = 2 if name in ("B", "gamma") else 1
    if len(idx) != expected:
        raise ConfigurationError(f"sweep target {target!r} needs {expected} index(es)")
    return name, idx


def _with_value(model: ModelSpec, target, value: float) -> ModelSpec:
    name, idx = target
    payload = model_to_payload(model)
    coeff = {"type": "const", "c": value}
    if name == "weights":
        payload["marks"]["weights"][idx[0]] = value
    elif name in ("a", "sigma"):
        payload[name][idx[0]] = coeff
    else:
        payload[name][idx[0]][idx[1]] = coeff
    return model_from_payload(payload)


def _grid_values(args) -> list[float]:
    if args.values:
        vals = [float(v) for v in args.values.split(",") if v.strip() != ""]
    elif args.grid:
        parts = args.grid.split(":")
        if len(parts) != 3:
            raise ConfigurationError("--grid must be start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ConfigurationError("--grid step must be > 0")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        vals = [start + k * step for k in range(count)]
    else:
        vals = []
    if not vals:
        raise ConfigurationError("sweep grid is empty")
    if any(not math.isfinite(v) for v in vals):
        raise ConfigurationError("sweep values must be finite")
    return vals


def cmd_sweep(args) -> int:
    out = _outdir(args)
    model = _load(args)
    target = _parse_target(args.param)
    values = _grid_values(args)
    rows = []
    for k, v in enumerate(values):
        swept = _with_value(model, target, v)
        rep = compute_regime_report(swept)
        for s in rep.species:
            rows.append(
                (
                    args.param,
                    v,
                    s.species,
                    s.classification,
                    s.eta.value,
                    s.c1.value,
                    s.net_growth_inf.value,
                    s.competition_margin.value,
                )
            )
    with open(out / "sweep.csv", "w", encoding="utf-8") as fh:
        fh.write(
            "param,value,species,classification,eta,c1,net_growth_inf,competition_margin\n"
        )
        for row in rows:
            fh.write(
                f"{row[0]},{format_float(row[1])},{row[2]},{row[3]},"
                + ",".join(format_float(v) for v in row[4:])
                + "\n"
            )
    print(f"wrote {out / 'sweep.csv'} ({len(values)} grid points)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lvjumps",
        description="Competitive population dynamics with Brownian noise and jumps",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, paths=False):
        p.add_argument("--model", required=True, help="model JSON file")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=0, help="master seed")
        p.add_argument("--T", type=float, default=5.0, help="time horizon")
        p.add_argument("--h", type=float, default=2.0**-10, help="step size (T/h integral)")
        if paths:
            p.add_argument("--paths", type=int, default=1000, help="Monte Carlo paths")
            p.add_argument("--checkpoints", type=int, default=50)

    p = sub.add_parser("validate", help="check the standing hypotheses")
    p.add_argument("--model", required=True)
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("simulate", help="integrate one path (optionally with bounds/oracle)")
    common(p)
    p.add_argument("--x0", help="comma-separated initial populations (default all 1)")
    p.add_argument("--with-bounds", action="store_true", help="also run the comparison systems")
    p.add_argument("--with-oracle", action="store_true", help="compare with the closed form (n=1)")
    p.add_argument("--oracle-tol", type=float, default=0.05)
    p.add_argument("--dump-path", action="store_true", help="write the binary path dump")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="Monte Carlo estimators and bound checks")
    p.add_argument(
        "which",
        choices=["moments", "lyapunov", "inverse-moment", "couple", "invariant"],
    )
    common(p, paths=True)
    p.add_argument("--x0", help="comma-separated initial populations (default all 1)")
    p.add_argument("--species", type=int, default=0, help="0-based species index")
    p.add_argument("--p", type=float, default=2.0, help="moment order")
    p.add_argument("--x", type=float, default=0.5, help="first initial value (couple/invariant)")
    p.add_argument("--y", type=float, default=2.0, help="second initial value (couple/invariant)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("classify", help="evaluate analytic conditions and classify")
    p.add_argument("--model", required=True)
    p.add_argument("--out", default="out")
    p.add_argument("--p-list", help="comma-separated moment orders for the jump bound")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("sweep", help="grid over one parameter, classify each point")
    p.add_argument("--model", required=True)
    p.add_argument("--out", default="out")
    p.add_argument("--param", required=True, help="target, e.g. a[0], B[0][1], weights[0]")
    p.add_argument("--grid", help="start:stop:step (inclusive)")
    p.add_argument("--values", help="comma-separated explicit values")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ModelFormatError, ConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except PrerequisiteError as exc:
        print(f"prerequisite unmet: {exc}", file=sys.stderr)
        return EXIT_PREREQUISITE
    except DomainError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except LVJumpsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
