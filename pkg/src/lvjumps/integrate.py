"""Positivity-preserving integration of the competitive jump-diffusion system.

The state is advanced in log coordinates (exponential Euler): between
consecutive merged-grid nodes each species' log population receives

    (a_i(t) - sum_j b_ij(t) X_j(t) - sigma_i(t)^2/2 - sum_k gamma_ik(t) w_k) dt
    + sigma_i(t) dW,

with all coefficients and states frozen at the left endpoint (explicit,
non-anticipating).  The ``-sigma^2/2`` term is the Ito correction in log
coordinates and the ``-sum_k gamma_ik w_k`` term is the compensator of the
centred jump measure.  At a jump with mark ``k`` the population is multiplied
by exactly ``1 + gamma_ik(tau)``.

Working in log space keeps every trajectory value strictly positive, which
the pathwise comparison tests rely on; a plain Euler step can go negative.

A path is flagged *diverged* (not an error) when a log population leaves the
window representable by float64 without denormalising; any NaN is a hard
error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError, IntegrationError
from .model import ModelSpec, as_initial_state, require_valid
from .noise import (
    KIND_LABELS,
    DrivingPath,
    MergedGrid,
    merge_grid,
)

__all__ = [
    "Trajectory",
    "simulate_system",
    "simulate_upper",
    "simulate_lower",
    "write_trajectory_csv",
    "format_float",
    "LOG_LOW",
    "LOG_HIGH",
]

# exp() of values outside this window would denormalise or overflow float64
LOG_LOW = -745.0
LOG_HIGH = 709.0


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Per-species positive sample path on a merged grid.

    ``values[i, s]`` is species ``i`` at slot ``s`` (left-limit and post-jump
    slots are separate at jump nodes).  For diverged paths the slots from the
    first offending time onward are NaN and ``diverged_at`` records that time.
    """

    grid: MergedGrid
    values: np.ndarray
    diverged: bool = False
    diverged_at: float | None = None

    @property
    def species_count(self) -> int:
        return self.values.shape[0]

    def final_values(self) -> np.ndarray:
        return self.values[:, -1]

    def at_time(self, t: float, kind: str = "post") -> np.ndarray:
        return self.values[:, self.grid.slot_at(t, kind)]

    def slot_norms(self) -> np.ndarray:
        """Euclidean norm across species, one value per slot."""
        return np.sqrt(np.sum(self.values * self.values, axis=0))


def _interval_data(model: ModelSpec, grid: MergedGrid, path: DrivingPath):
    """Left-endpoint coefficient values per interval, plus jump factors."""
    t_left = grid.times[:-1]
    n, K = model.n, model.mark_count
    weights = np.asarray(model.marks.weights, dtype=float)
    a_vals = np.stack([np.asarray(f(t_left), dtype=float) for f in model.a], axis=1)
    sig_vals = np.stack([np.asarray(f(t_left), dtype=float) for f in model.sigma], axis=1)
    corr = 0.5 * sig_vals**2
    if K:
        for i in range(n):
            for k in range(K):
                corr[:, i] += weights[k] * np.asarray(model.gamma[i][k](t_left), dtype=float)
    B_vals = np.empty((len(t_left), n, n))
    for i in range(n):
        for j in range(n):
            B_vals[:, i, j] = model.B[i][j](t_left)
    jump_factors = [
        [1.0 + float(model.gamma[i][int(mark)](float(tau))) for i in range(n)]
        for tau, mark in zip(path.jump_times, path.jump_marks)
    ]
    return a_vals, B_vals, sig_vals, corr, jump_factors


def _walk_slots(grid: MergedGrid):
    """Per interval: does the right node carry a jump, and which jump is it."""
    jump_counter = np.cumsum(grid.is_jump.astype(np.int64)) - grid.is_jump.astype(np.int64)
    return grid.is_jump[1:].tolist(), jump_counter[1:].tolist()


def _finish(grid, rows, n, diverged_at):
    S = grid.n_slots
    out = np.full((n, S), np.nan)
    if rows:
        filled = np.asarray(rows, dtype=float).T
        out[:, : filled.shape[1]] = filled
    return Trajectory(
        grid=grid,
        values=out,
        diverged=diverged_at is not None,
        diverged_at=diverged_at,
    )


def simulate_system(model: ModelSpec, x0, path: DrivingPath) -> Trajectory:
    """Integrate the full n-species system along one driving path.

    Args:
        model: Valid model (standing hypotheses are enforced).
        x0: InitialState or length-n positive array.
        path: Driving noise realisation.

    Raises:
        IntegrationError: on NaN state.
        DomainError: if the model violates the standing hypotheses.
    """
    require_valid(model)
    state = as_initial_state(x0, model.n)
    grid = merge_grid(path)
    n = model.n
    a_vals, B_vals, sig_vals, corr, jf = _interval_data(model, grid, path)
    if n == 1:
        return _run_scalar(
            grid,
            path,
            float(math.log(state.x0[0])),
            a_vals[:, 0].tolist(),
            B_vals[:, 0, 0].tolist(),
            sig_vals[:, 0].tolist(),
            corr[:, 0].tolist(),
            [row[0] for row in jf],
        )
    return _run_vector(grid, path, state, a_vals, B_vals, sig_vals, corr, jf)


def _run_vector(grid, path, state, a_vals, B_vals, sig_vals, corr, jump_factors):
    n = len(state.x0)
    dt = np.diff(grid.times).tolist()
    dw = path.node_increments.tolist()
    a_l = a_vals.tolist()
    B_l = B_vals.tolist()
    s_l = sig_vals.tolist()
    c_l = corr.tolist()
    is_jump, jump_idx = _walk_slots(grid)
    logx = [math.log(v) for v in state.x0]
    x = [math.exp(v) for v in logx]
    rows = [list(x)]
    diverged_at = None
    for l in range(len(dt)):
        al = a_l[l]
        Bl = B_l[l]
        sl = s_l[l]
        cl = c_l[l]
        dtl = dt[l]
        dwl = dw[l]
        for i in range(n):
            Bi = Bl[i]
            acc = 0.0
            for j in range(n):
                acc += Bi[j] * x[j]
            logx[i] += (al[i] - acc - cl[i]) * dtl + sl[i] * dwl
        bad = False
        for v in logx:
            if not (LOG_LOW < v < LOG_HIGH):
                bad = True
            if v != v:
                raise IntegrationError(f"NaN state at t={grid.times[l + 1]!r}")
        if bad:
            diverged_at = float(grid.times[l + 1])
            break
        x = [math.exp(v) for v in logx]
        rows.append(list(x))
        if is_jump[l]:
            factors = jump_factors[jump_idx[l]]
            nxt = [xi * fi for xi, fi in zip(x, factors)]
            bad = False
            for v in nxt:
                if v != v:
                    raise IntegrationError(f"NaN state at t={grid.times[l + 1]!r}")
                if not (v > 0.0) or not (LOG_LOW < math.log(v) < LOG_HIGH):
                    bad = True
            if bad:
                diverged_at = float(grid.times[l + 1])
                break
            x = nxt
            logx = [math.log(v) for v in x]
            rows.append(list(x))
    return _finish(grid, rows, n, diverged_at)


def _run_scalar(grid, path, logx0, a_eff, b_self, sig, corr, jump_factors):
    """Self-regulating 1-D kernel: drift a(t) - b(t) * state."""
    dt = np.diff(grid.times).tolist()
    dw = path.node_increments.tolist()
    is_jump, jump_idx = _walk_slots(grid)
    logx = logx0
    x = math.exp(logx)
    rows = [[x]]
    diverged_at = None
    for l in range(len(dt)):
        a = a_eff[l]
        acc = b_self[l] * x
        logx += (a - acc - corr[l]) * dt[l] + sig[l] * dw[l]
        if logx != logx:
            raise IntegrationError(f"NaN state at t={grid.times[l + 1]!r}")
        if not (LOG_LOW < logx < LOG_HIGH):
            diverged_at = float(grid.times[l + 1])
            break
        x = math.exp(logx)
        rows.append([x])
        if is_jump[l]:
            nxt = x * jump_factors[jump_idx[l]]
            if nxt != nxt:
                raise IntegrationError(f"NaN state at t={grid.times[l + 1]!r}")
            if not (nxt > 0.0) or not (LOG_LOW < math.log(nxt) < LOG_HIGH):
                diverged_at = float(grid.times[l + 1])
                break
            x = nxt
            logx = math.log(x)
            rows.append([x])
    return _finish(grid, rows, 1, diverged_at)


def _run_lower(grid, path, logz0, i, a_vals, B_row, frozen, sig, corr, jump_factors):
    """Lower-system kernel: species ``i``'s own state against the frozen
    competitors ``frozen[l][j]`` (the upper solutions at each interval start).

    The accumulation mirrors the full-system kernel term for term, so when
    the frozen competitors coincide with the full state the float arithmetic
    coincides too and the pathwise ordering cannot be broken by rounding.
    """
    n = len(frozen[0]) if frozen else 1
    dt = np.diff(grid.times).tolist()
    dw = path.node_increments.tolist()
    is_jump, jump_idx = _walk_slots(grid)
    logz = logz0
    z = math.exp(logz)
    rows = [[z]]
    diverged_at = None
    for l in range(len(dt)):
        Bl = B_row[l]
        wl = frozen[l]
        acc = 0.0
        for j in range(n):
            acc += Bl[j] * (z if j == i else wl[j])
        logz += (a_vals[l] - acc - corr[l]) * dt[l] + sig[l] * dw[l]
        if logz != logz:
            raise IntegrationError(f"NaN state at t={grid.times[l + 1]!r}")
        if not (LOG_LOW < logz < LOG_HIGH):
            diverged_at = float(grid.times[l + 1])
            break
        z = math.exp(logz)
        rows.append([z])
        if is_jump[l]:
            nxt = z * jump_factors[jump_idx[l]]
            if nxt != nxt:
                raise IntegrationError(f"NaN state at t={grid.times[l + 1]!r}")
            if not (nxt > 0.0) or not (LOG_LOW < math.log(nxt) < LOG_HIGH):
                diverged_at = float(grid.times[l + 1])
                break
            z = nxt
            logz = math.log(z)
            rows.append([z])
    return _finish(grid, rows, 1, diverged_at)


def simulate_upper(model: ModelSpec, i: int, x0_i: float, path: DrivingPath) -> Trajectory:
    """Integrate the scalar upper comparison system for species ``i``.

    The drift keeps only the self-interaction ``a_i - b_ii Y_i``; noise and
    jumps are identical to the full system's, so the result dominates the
    ``i``-th component pathwise.
    """
    require_valid(model)
    if not (0 <= i < model.n):
        raise IndexError(f"species index {i} out of range")
    if not (x0_i > 0):
        raise ValueError("initial value must be positive")
    grid = merge_grid(path)
    t_left = grid.times[:-1]
    a_vals = np.asarray(model.a[i](t_left), dtype=float)
    b_vals = np.asarray(model.B[i][i](t_left), dtype=float)
    sig_vals = np.asarray(model.sigma[i](t_left), dtype=float)
    corr = 0.5 * sig_vals**2
    weights = model.marks.weights
    for k in range(model.mark_count):
        corr += weights[k] * np.asarray(model.gamma[i][k](t_left), dtype=float)
    jf = [
        1.0 + float(model.gamma[i][int(mark)](float(tau)))
        for tau, mark in zip(path.jump_times, path.jump_marks)
    ]
    return _run_scalar(
        grid,
        path,
        math.log(float(x0_i)),
        a_vals.tolist(),
        b_vals.tolist(),
        sig_vals.tolist(),
        corr.tolist(),
        jf,
    )


def simulate_lower(
    model: ModelSpec,
    i: int,
    x0_i: float,
    path: DrivingPath,
    uppers,
) -> Trajectory:
    """Integrate the scalar lower comparison system for species ``i``.

    The growth rate is reduced by the competition pressure of the *upper*
    solutions, ``a_i(t) - sum_{j != i} b_ij(t) Y_j(t)``; everything else
    matches :func:`simulate_upper`.

    Args:
        uppers: sequence of n single-species trajectories on the same grid
            (entry ``i`` may be None, it is not used).

    Raises:
        GridMismatchError: when an upper trajectory lives on another grid.
    """
    require_valid(model)
    if not (0 <= i < model.n):
        raise IndexError(f"species index {i} out of range")
    if not (x0_i > 0):
        raise ValueError("initial value must be positive")
    if len(uppers) != model.n:
        raise GridMismatchError(f"need {model.n} upper trajectories")
    grid = merge_grid(path)
    t_left = grid.times[:-1]
    start_slots = grid.interval_start_slots()
    frozen = np.zeros((len(t_left), model.n))
    for j in range(model.n):
        if j == i:
            continue
        traj = uppers[j]
        if traj is None or not traj.grid.same_nodes(grid):
            raise GridMismatchError("upper trajectories must share the path's grid")
        frozen[:, j] = traj.values[0, start_slots]
    B_row = np.stack(
        [np.asarray(model.B[i][j](t_left), dtype=float) for j in range(model.n)],
        axis=1,
    )
    a_vals = np.asarray(model.a[i](t_left), dtype=float)
    sig_vals = np.asarray(model.sigma[i](t_left), dtype=float)
    corr = 0.5 * sig_vals**2
    weights = model.marks.weights
    for k in range(model.mark_count):
        corr += weights[k] * np.asarray(model.gamma[i][k](t_left), dtype=float)
    jf = [
        1.0 + float(model.gamma[i][int(mark)](float(tau)))
        for tau, mark in zip(path.jump_times, path.jump_marks)
    ]
    return _run_lower(
        grid,
        path,
        math.log(float(x0_i)),
        i,
        a_vals.tolist(),
        B_row.tolist(),
        frozen.tolist(),
        sig_vals.tolist(),
        corr.tolist(),
        jf,
    )


def format_float(x: float) -> str:
    """17-significant-digit decimal rendering: lossless for float64."""
    return format(float(x), ".17g")


def write_trajectory_csv(traj: Trajectory, fileobj, header_names=None) -> None:
    """Write slots as rows: time, slot_kind, one column per species.

    Diverged paths end with a DIVERGED sentinel row after the last finite slot.
    """
    n = traj.species_count
    names = header_names or [f"X_{i + 1}" for i in range(n)]
    fileobj.write("time,slot_kind," + ",".join(names) + "\n")
    grid = traj.grid
    for s in range(grid.n_slots):
        vals = traj.values[:, s]
        if np.any(np.isnan(vals)):
            break
        fileobj.write(
            format_float(grid.slot_times[s])
            + ","
            + KIND_LABELS[grid.slot_kinds[s]]
            + ","
            + ",".join(format_float(v) for v in vals)
            + "\n"
        )
    if traj.diverged:
        fileobj.write(
            "DIVERGED," + format_float(traj.diverged_at) + "," + ",".join([""] * n) + "\n"
        )
