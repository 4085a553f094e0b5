"""Monte Carlo estimators for the model's probabilistic statements.

Every estimator is a deterministic function of its inputs and a master seed:
path ``j`` draws its own 64-bit seed by seed-sequence spawning from
``(master_seed, j)``, accumulation runs in fixed path order, and diverged
paths are excluded from statistics but counted.  Statistical assertions
downstream use 3-standard-error bands.

``|X|`` is throughout the Euclidean norm across species.  Estimators of the
scalar self-regulating solution go through the explicit closed form in log
space (exact up to quadrature, safe on long horizons); estimators of the full
system go through the log-Euler integrator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .closedform import explicit_logistic_log
from .coefficients import Const, coeff_sup
from .conditions import compute_regime_report
from .errors import PrerequisiteError
from .integrate import Trajectory, format_float, simulate_system, simulate_upper
from .model import ModelSpec, as_initial_state
from .noise import derive_path_seed, sample_driving_path

__all__ = [
    "MCSeries",
    "default_checkpoints",
    "estimate_moment",
    "lyapunov_functional",
    "lyapunov_functional_mc",
    "FunctionalMC",
    "sample_lyapunov",
    "LyapunovSeries",
    "sample_lyapunov_mc",
    "LyapunovMC",
    "inverse_moment_check",
    "BoundCheckResult",
    "coupling_contraction",
    "CouplingResult",
    "invariant_distance",
    "InvariantDistanceResult",
    "terminal_sample",
    "dkw_epsilon",
    "write_mc_csv",
]


@dataclass(frozen=True)
class MCSeries:
    """A Monte Carlo time series: sample mean and standard error per checkpoint."""

    checkpoints: np.ndarray
    mean: np.ndarray
    std_error: np.ndarray
    n_paths: int
    diverged_count: int = 0

    def __post_init__(self):
        if np.any(self.std_error < 0):
            raise ValueError("standard errors must be non-negative")


def default_checkpoints(T: float, h: float, count: int = 50) -> np.ndarray:
    """``count`` roughly uniform times snapped onto the step grid, ending at T."""
    M = round(T / h)
    grid = np.linspace(0.0, T, M + 1)
    idx = np.unique(np.clip(np.round(np.arange(1, count + 1) * M / count), 1, M).astype(int))
    return grid[idx]


def _checkpoint_slots(grid, checkpoint_times):
    nodes = np.searchsorted(grid.times, checkpoint_times)
    if not np.array_equal(grid.times[nodes], checkpoint_times):
        raise ValueError("checkpoints must lie on the path grid")
    return grid.node_first_slot[nodes] + grid.is_jump[nodes].astype(np.int64)


def _series_from_samples(checkpoints, samples, diverged) -> MCSeries:
    arr = np.asarray(samples, dtype=float)
    n = arr.shape[0]
    mean = arr.mean(axis=0)
    se = arr.std(axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.zeros(arr.shape[1])
    return MCSeries(
        checkpoints=np.asarray(checkpoints, dtype=float),
        mean=mean,
        std_error=se,
        n_paths=n + diverged,
        diverged_count=diverged,
    )


def estimate_moment(
    model: ModelSpec,
    x0,
    p: float,
    T: float,
    h: float,
    n_paths: int,
    seed: int,
    checkpoint_count: int = 50,
) -> MCSeries:
    """Sample mean and standard error of ``|X(t)|^p`` at the checkpoints.

    For ``p > 1`` the moment theorem additionally needs the p-th jump moment
    bound (see :func:`lvjumps.conditions.check_moment_condition`); the
    estimator itself runs regardless.
    """
    if p < 0:
        raise ValueError("p must be >= 0")
    state = as_initial_state(x0, model.n)
    checkpoints = default_checkpoints(T, h, checkpoint_count)
    extra = model.pwc_breakpoints()
    samples = []
    diverged = 0
    for j in range(n_paths):
        path = sample_driving_path(
            model.marks, T, h, derive_path_seed(seed, j), extra_times=_inside(extra, T)
        )
        traj = simulate_system(model, state, path)
        if traj.diverged:
            diverged += 1
            continue
        slots = _checkpoint_slots(traj.grid, checkpoints)
        norms = traj.slot_norms()[slots]
        samples.append(norms**p)
    if not samples:
        raise PrerequisiteError("all paths diverged; nothing to estimate")
    return _series_from_samples(checkpoints, samples, diverged)


def _inside(breaks, T):
    return tuple(b for b in breaks if 0.0 < b < T)


def lyapunov_functional(traj: Trajectory, model: ModelSpec) -> float:
    """Growth functional ``(ln|X(T)| + (min_i inf b_ii / sqrt(n)) int_0^T |X|) / T``.

    The time integral uses trapezoidal quadrature on the merged grid.
    """
    if traj.diverged:
        raise ValueError("functional undefined on a diverged trajectory")
    grid = traj.grid
    T = float(grid.times[-1])
    norms = traj.slot_norms()
    deltas = np.diff(grid.times)
    integral = float(
        np.sum(
            0.5
            * deltas
            * (norms[grid.interval_start_slots()] + norms[grid.interval_end_slots()])
        )
    )
    n = traj.species_count
    b_floor = min(model.B[i][i].infimum for i in range(n))
    return (math.log(norms[-1]) + (b_floor / math.sqrt(n)) * integral) / T


@dataclass(frozen=True)
class FunctionalMC:
    mean: float
    std_error: float
    bound: float
    n_paths: int
    diverged_count: int

    @property
    def within_bound(self) -> bool:
        return self.mean <= self.bound + 3.0 * self.std_error


def lyapunov_functional_mc(
    model: ModelSpec, x0, T: float, h: float, n_paths: int, seed: int
) -> FunctionalMC:
    """Monte Carlo mean of the growth functional against ``max_i sup a_i``."""
    state = as_initial_state(x0, model.n)
    extra = model.pwc_breakpoints()
    vals = []
    diverged = 0
    for j in range(n_paths):
        path = sample_driving_path(
            model.marks, T, h, derive_path_seed(seed, j), extra_times=_inside(extra, T)
        )
        traj = simulate_system(model, state, path)
        if traj.diverged:
            diverged += 1
            continue
        vals.append(lyapunov_functional(traj, model))
    arr = np.asarray(vals)
    se = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0
    bound = max(coeff_sup(f) for f in model.a)
    return FunctionalMC(
        mean=float(arr.mean()),
        std_error=se,
        bound=bound,
        n_paths=n_paths,
        diverged_count=diverged,
    )


@dataclass(frozen=True)
class LyapunovSeries:
    """Normalised log-population series for one trajectory."""

    times: np.ndarray
    log_over_t: np.ndarray
    log_over_log_t: np.ndarray  # NaN where t <= 1


def sample_lyapunov(traj: Trajectory, i: int, checkpoint_times=None) -> LyapunovSeries:
    """``ln X_i(t)/t`` and ``ln X_i(t)/ln t`` at the given grid times."""
    grid = traj.grid
    if checkpoint_times is None:
        checkpoint_times = grid.times[grid.times > 0]
    checkpoint_times = np.asarray(checkpoint_times, dtype=float)
    slots = _checkpoint_slots(grid, checkpoint_times)
    logs = np.log(traj.values[i, slots])
    with np.errstate(divide="ignore", invalid="ignore"):
        over_log = np.where(checkpoint_times > 1.0, logs / np.log(checkpoint_times), np.nan)
    return LyapunovSeries(
        times=checkpoint_times,
        log_over_t=logs / checkpoint_times,
        log_over_log_t=over_log,
    )


@dataclass(frozen=True)
class LyapunovMC:
    over_t: MCSeries
    over_log_t: MCSeries
    final_values: np.ndarray


def sample_lyapunov_mc(
    model: ModelSpec,
    i: int,
    x0_i: float,
    T: float,
    h: float,
    n_paths: int,
    seed: int,
    checkpoint_count: int = 50,
) -> LyapunovMC:
    """Monte Carlo of the scalar upper solution's normalised log population."""
    checkpoints = default_checkpoints(T, h, checkpoint_count)
    extra = model.pwc_breakpoints()
    over_t, over_log, finals = [], [], []
    diverged = 0
    for j in range(n_paths):
        path = sample_driving_path(
            model.marks, T, h, derive_path_seed(seed, j), extra_times=_inside(extra, T)
        )
        traj = simulate_upper(model, i, x0_i, path)
        if traj.diverged:
            diverged += 1
            continue
        series = sample_lyapunov(traj, 0, checkpoints)
        over_t.append(series.log_over_t)
        over_log.append(series.log_over_log_t)
        finals.append(float(traj.values[0, -1]))
    if not over_t:
        raise PrerequisiteError("all paths diverged; nothing to estimate")
    return LyapunovMC(
        over_t=_series_from_samples(checkpoints, over_t, diverged),
        over_log_t=_series_from_samples(checkpoints, over_log, diverged),
        final_values=np.asarray(finals),
    )


def _require_positive_margin(model: ModelSpec, i: int) -> float:
    report = compute_regime_report(model)
    c1 = report.species[i].c1
    if not c1.value > 0.0:
        raise PrerequisiteError(
            f"the permanence condition fails for species {i + 1}: "
            f"inf(a - sigma^2 - jump mass) = {c1.value:g} <= 0; "
            "the requested bound is meaningless"
        )
    return c1.value


@dataclass(frozen=True)
class BoundCheckResult:
    """An estimated series together with its analytic bound curve."""

    series: MCSeries
    bound: np.ndarray
    ok: np.ndarray  # mean - 3 se <= bound, per checkpoint

    @property
    def all_ok(self) -> bool:
        return bool(np.all(self.ok))


def inverse_moment_check(
    model: ModelSpec,
    i: int,
    x0_i: float,
    T: float,
    h: float,
    n_paths: int,
    seed: int,
    checkpoint_count: int = 50,
) -> BoundCheckResult:
    """Estimate ``E[1/Y_i(t)]`` and compare with its exponential-decay bound.

    The bound is ``sup(b_ii)/c1 + (1/x0 - sup(b_ii)/c1) exp(-c1 t)``; the
    estimator refuses to run when the permanence condition fails.
    """
    c1 = _require_positive_margin(model, i)
    checkpoints = default_checkpoints(T, h, checkpoint_count)
    extra = model.pwc_breakpoints()
    samples = []
    for j in range(n_paths):
        path = sample_driving_path(
            model.marks, T, h, derive_path_seed(seed, j), extra_times=_inside(extra, T)
        )
        series = explicit_logistic_log(model, i, x0_i, path)
        slots = _checkpoint_slots(series.grid, checkpoints)
        samples.append(np.exp(-series.values[slots]))
    mc = _series_from_samples(checkpoints, samples, 0)
    b_sup = coeff_sup(model.B[i][i])
    bound = b_sup / c1 + (1.0 / x0_i - b_sup / c1) * np.exp(-c1 * checkpoints)
    ok = mc.mean - 3.0 * mc.std_error <= bound
    return BoundCheckResult(series=mc, bound=bound, ok=ok)


@dataclass(frozen=True)
class CouplingResult:
    """Common-noise coupling decay of two solutions started at x and y.

    ``sign_consistent_fraction`` counts paths on which the reciprocal
    difference never takes the sign opposite to ``1/x - 1/y`` at any slot.
    The difference is a positive multiple of ``1/x - 1/y`` exactly, but once
    the stochastic exponential exceeds ~e^37 the two reciprocals are closer
    than one float64 ulp and their computed difference collapses to zero;
    a collapsed zero is not a reversal.
    """

    inverse_diff: MCSeries
    envelope: np.ndarray
    ok: np.ndarray
    half_moment_diff: MCSeries
    sign_consistent_fraction: float

    @property
    def all_ok(self) -> bool:
        return bool(np.all(self.ok))


def coupling_contraction(
    model: ModelSpec,
    i: int,
    x: float,
    y: float,
    T: float,
    h: float,
    n_paths: int,
    seed: int,
    checkpoint_count: int = 50,
) -> CouplingResult:
    """Couple two scalar solutions through one driving path per replicate.

    Checks ``E|1/Y(t,x) - 1/Y(t,y)| <= |1/x - 1/y| exp(-c1 t)`` (plus noise)
    and reports ``E|Y(t,x) - Y(t,y)|^(1/2)``.  Because the two solutions share
    the path, their reciprocal difference is a positive multiple of
    ``1/x - 1/y``, which the sign consistency fraction verifies numerically.
    """
    c1 = _require_positive_margin(model, i)
    checkpoints = default_checkpoints(T, h, checkpoint_count)
    extra = model.pwc_breakpoints()
    inv_samples, half_samples = [], []
    sign_ok = 0
    expected = 1.0 / x - 1.0 / y
    for j in range(n_paths):
        path = sample_driving_path(
            model.marks, T, h, derive_path_seed(seed, j), extra_times=_inside(extra, T)
        )
        lx = explicit_logistic_log(model, i, x, path)
        ly = explicit_logistic_log(model, i, y, path)
        inv_diff_all = np.exp(-lx.values) - np.exp(-ly.values)
        if x == y:
            sign_ok += int(np.all(inv_diff_all == 0.0))
        else:
            sign_ok += int(np.all(inv_diff_all * np.sign(expected) >= 0.0))
        slots = _checkpoint_slots(lx.grid, checkpoints)
        inv_samples.append(np.abs(inv_diff_all[slots]))
        half_samples.append(
            np.sqrt(np.abs(np.exp(lx.values[slots]) - np.exp(ly.values[slots])))
        )
    inv_mc = _series_from_samples(checkpoints, inv_samples, 0)
    half_mc = _series_from_samples(checkpoints, half_samples, 0)
    envelope = abs(expected) * np.exp(-c1 * checkpoints)
    ok = inv_mc.mean <= envelope + 3.0 * inv_mc.std_error
    return CouplingResult(
        inverse_diff=inv_mc,
        envelope=envelope,
        ok=ok,
        half_moment_diff=half_mc,
        sign_consistent_fraction=sign_ok / n_paths,
    )


def terminal_sample(
    model: ModelSpec,
    i: int,
    x0_i: float,
    T: float,
    h: float,
    n_paths: int,
    seed: int,
    stream_offset: int = 0,
) -> np.ndarray:
    """Terminal values ``Y_i(T)`` over ``n_paths`` independent paths."""
    extra = model.pwc_breakpoints()
    out = np.empty(n_paths)
    for j in range(n_paths):
        path = sample_driving_path(
            model.marks,
            T,
            h,
            derive_path_seed(seed, stream_offset + j),
            extra_times=_inside(extra, T),
        )
        out[j] = math.exp(explicit_logistic_log(model, i, x0_i, path).final())
    return out


def dkw_epsilon(n: int, confidence: float = 0.99) -> float:
    """One-sample Dvoretzky-Kiefer-Wolfowitz band half-width."""
    return math.sqrt(math.log(2.0 / (1.0 - confidence)) / (2.0 * n))


@dataclass(frozen=True)
class InvariantDistanceResult:
    distance: float
    sampling_floor: float
    n_paths: int

    @property
    def within_floor(self) -> bool:
        return self.distance <= self.sampling_floor


def invariant_distance(
    model: ModelSpec,
    i: int,
    x: float,
    y: float,
    T: float,
    h: float,
    n_paths: int,
    seed: int,
    slack: float = 0.02,
) -> InvariantDistanceResult:
    """Kolmogorov distance between the laws of ``Y(T, x)`` and ``Y(T, y)``.

    Scope is the time-independent (all-constant) permanent model, whose law
    forgets the initial condition; the two empirical samples use independent
    path sets (offset seed streams).  The sampling floor is the two-sample
    DKW 99% band plus a fixed slack.  With ``x == y`` the two laws coincide
    by construction and the single sample set is reused, so the distance is
    exactly zero.

    Raises:
        PrerequisiteError: time-dependent coefficients or failing permanence.
    """
    if not all(isinstance(f, Const) for f in model.all_coefficients()):
        raise PrerequisiteError(
            "invariant-measure comparison is stated for constant coefficients only"
        )
    _require_positive_margin(model, i)
    sample_x = terminal_sample(model, i, x, T, h, n_paths, seed, stream_offset=0)
    if x == y:
        sample_y = sample_x
    else:
        sample_y = terminal_sample(model, i, y, T, h, n_paths, seed, stream_offset=n_paths)
    distance = float(stats.ks_2samp(sample_x, sample_y, method="asymp").statistic)
    floor = 2.0 * dkw_epsilon(n_paths) + slack
    return InvariantDistanceResult(distance=distance, sampling_floor=floor, n_paths=n_paths)


def write_mc_csv(series: MCSeries, fileobj, bound=None, flags=None) -> None:
    """CSV rows: checkpoint, mean, std_error[, bound, flag]."""
    cols = ["checkpoint", "mean", "std_error"]
    if bound is not None:
        cols.append("bound")
    if flags is not None:
        cols.append("flag")
    fileobj.write(",".join(cols) + "\n")
    for idx in range(len(series.checkpoints)):
        row = [
            format_float(series.checkpoints[idx]),
            format_float(series.mean[idx]),
            format_float(series.std_error[idx]),
        ]
        if bound is not None:
            row.append(format_float(bound[idx]))
        if flags is not None:
            row.append(str(bool(flags[idx])).lower())
        fileobj.write(",".join(row) + "\n")
