"""Shared driving noise: Brownian increments plus exact compound-Poisson jumps.

One :class:`DrivingPath` realisation is consumed by every process built on the
same noise (the full system, the one-dimensional comparison systems, and the
stochastic exponential), which is what makes pathwise comparison and coupling
tests meaningful.

Determinism contract
--------------------
Regenerating a path with the same ``(seed, T, h, marks, extra_times)`` under
the same ``rng_algorithm_id`` reproduces it bit-exactly.  The algorithm id
pins the draw order: jump inter-arrival times first (exact exponential
sampling, block-buffered), then mark labels, then one Gaussian increment per
merged-grid interval.  Increments are generated directly on the merged grid
(uniform nodes plus jump times plus requested extra nodes), so the Brownian
value at a jump time is exact in law; per-uniform-cell increments are their
within-cell sums and are therefore i.i.d. Normal(0, h) as required.

Derived paths (``coarsen_path``, ``refine_path``) keep the identical jump
record and re-use the parent's Gaussian randomness, so every resolution of a
convergence study shares one underlying Brownian path.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, GridMismatchError
from .model import MarkSpace

__all__ = [
    "RNG_ALGORITHM",
    "DrivingPath",
    "MergedGrid",
    "sample_driving_path",
    "merge_grid",
    "coarsen_path",
    "refine_path",
    "save_path",
    "load_path",
    "derive_path_seed",
]

RNG_ALGORITHM = "pcg64/jumps-marks-increments/v1"

_EXP_BLOCK = 256
_REFINE_STREAM_TAG = 0x52464E31  # distinct entropy word for bridge refinement

KIND_GRID, KIND_LEFT, KIND_POST = 0, 1, 2
KIND_LABELS = ("grid", "left", "post")


def _uniform_times(T: float, M: int) -> np.ndarray:
    return np.linspace(0.0, T, M + 1)


def _steps_of(T: float, h: float) -> int:
    if not (T > 0 and h > 0):
        raise ConfigurationError(f"need T > 0 and h > 0, got T={T}, h={h}")
    M = round(T / h)
    if M < 1 or abs(M * h - T) > 1e-9 * max(1.0, abs(T)):
        raise ConfigurationError(f"T/h must be a positive integer, got T={T}, h={h}")
    return M


@dataclass(frozen=True, eq=False)
class DrivingPath:
    """One realisation of the driving noise on ``[0, T]``.

    ``node_times`` is the merged grid (uniform grid, jump times, extra
    nodes); ``node_increments[l]`` is the Brownian increment over
    ``[node_times[l], node_times[l+1]]``.  ``brownian_increments`` are the
    per-uniform-cell sums, each distributed Normal(0, h).
    """

    T: float
    h: float
    seed: int
    mark_count: int
    node_times: np.ndarray
    node_increments: np.ndarray
    jump_times: np.ndarray
    jump_marks: np.ndarray
    extra_times: np.ndarray
    rng_algorithm_id: str = RNG_ALGORITHM

    def __post_init__(self):
        M = _steps_of(self.T, self.h)
        times = self.node_times
        if times[0] != 0.0 or times[-1] != self.T:
            raise ConfigurationError("path nodes must start at 0 and end at T")
        if np.any(np.diff(times) <= 0):
            raise ConfigurationError("path nodes must be strictly increasing")
        if len(self.node_increments) != len(times) - 1:
            raise ConfigurationError("need one increment per node interval")
        if len(self.jump_times) != len(self.jump_marks):
            raise ConfigurationError("jump times and marks must align")
        if len(self.jump_times) and (
            np.any(np.diff(self.jump_times) <= 0)
            or self.jump_times[0] <= 0
            or self.jump_times[-1] > self.T
        ):
            raise ConfigurationError("jump times must be strictly increasing in (0, T]")
        object.__setattr__(self, "_steps", M)

    @property
    def steps(self) -> int:
        """Number of uniform cells M = T/h."""
        return self._steps

    @property
    def jump_count(self) -> int:
        return len(self.jump_times)

    def uniform_times(self) -> np.ndarray:
        return _uniform_times(self.T, self.steps)

    def _uniform_node_indices(self) -> np.ndarray:
        idx = np.searchsorted(self.node_times, self.uniform_times())
        if not np.array_equal(self.node_times[idx], self.uniform_times()):
            raise GridMismatchError("uniform grid points missing from path nodes")
        return idx

    @property
    def brownian_increments(self) -> np.ndarray:
        """Per-uniform-cell Brownian increments, shape (M,)."""
        idx = self._uniform_node_indices()
        return np.add.reduceat(self.node_increments, idx[:-1])

    def brownian_endpoint(self) -> float:
        """W(T)."""
        return float(self.node_increments.sum())


def sample_driving_path(
    marks: MarkSpace,
    T: float,
    h: float,
    seed: int,
    extra_times=(),
) -> DrivingPath:
    """Draw one driving-noise realisation.

    Jump times are the points of a rate-``marks.total_mass`` Poisson process
    on ``(0, T]`` via exact exponential inter-arrival sampling; each mark is
    drawn independently with probability proportional to its weight.
    ``extra_times`` inserts additional deterministic nodes (e.g. coefficient
    breakpoints) into the grid at generation time.

    Raises:
        ConfigurationError: if T/h is not a positive integer or extra nodes
            fall outside (0, T).
    """
    M = _steps_of(T, h)
    if seed < 0:
        raise ConfigurationError("seed must be a non-negative integer")
    extra = np.sort(np.unique(np.asarray(extra_times, dtype=float)))
    if len(extra) and (extra[0] <= 0 or extra[-1] >= T):
        raise ConfigurationError("extra nodes must lie strictly inside (0, T)")
    rng = np.random.default_rng(seed)

    total = marks.total_mass if marks.size else 0.0
    if total > 0:
        gaps = []
        acc = 0.0
        while acc <= T:
            block = rng.exponential(1.0 / total, _EXP_BLOCK)
            gaps.append(block)
            acc += float(block.sum())
        arrivals = np.cumsum(np.concatenate(gaps))
        jump_times = arrivals[arrivals <= T]
        cum = np.cumsum(np.asarray(marks.weights)) / total
        u = rng.random(len(jump_times))
        jump_marks = np.minimum(
            np.searchsorted(cum, u, side="right"), marks.size - 1
        ).astype(np.int64)
    else:
        jump_times = np.empty(0, dtype=float)
        jump_marks = np.empty(0, dtype=np.int64)

    node_times = np.unique(
        np.concatenate((_uniform_times(T, M), jump_times, extra))
    )
    deltas = np.diff(node_times)
    node_increments = rng.standard_normal(len(deltas)) * np.sqrt(deltas)

    return DrivingPath(
        T=float(T),
        h=float(h),
        seed=int(seed),
        mark_count=marks.size,
        node_times=node_times,
        node_increments=node_increments,
        jump_times=jump_times,
        jump_marks=jump_marks,
        extra_times=extra,
    )


@dataclass(frozen=True, eq=False)
class MergedGrid:
    """Node and slot structure of a driving path.

    Every node carries one slot, except jump nodes which carry a left-limit
    slot followed by a post-jump slot.  ``node_first_slot[l]`` is the slot
    index of node ``l``'s first (or only) slot.
    """

    times: np.ndarray
    is_jump: np.ndarray
    jump_mark: np.ndarray
    slot_times: np.ndarray
    slot_kinds: np.ndarray
    node_first_slot: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.times)

    @property
    def n_slots(self) -> int:
        return len(self.slot_times)

    def node_index(self, t: float) -> int:
        idx = int(np.searchsorted(self.times, t))
        if idx >= len(self.times) or self.times[idx] != t:
            raise GridMismatchError(f"time {t!r} is not a grid node")
        return idx

    def slot_at(self, t: float, kind: str = "post") -> int:
        """Slot index at node time ``t``; ``kind`` picks the left or
        post-jump slot at a jump node (the cadlag value is the post slot)."""
        l = self.node_index(t)
        base = int(self.node_first_slot[l])
        if self.is_jump[l] and kind == "post":
            return base + 1
        return base

    def interval_start_slots(self) -> np.ndarray:
        """Slot holding the state at the start of each node interval."""
        return (self.node_first_slot + self.is_jump.astype(np.int64))[:-1]

    def interval_end_slots(self) -> np.ndarray:
        """Slot holding the (pre-jump) state at the end of each interval."""
        return self.node_first_slot[1:]

    def same_nodes(self, other: "MergedGrid") -> bool:
        return np.array_equal(self.times, other.times) and np.array_equal(
            self.is_jump, other.is_jump
        )


def merge_grid(path: DrivingPath) -> MergedGrid:
    """Build the slot structure for a path (deduplicated, sorted nodes)."""
    times = path.node_times
    L = len(times)
    is_jump = np.zeros(L, dtype=bool)
    jump_mark = np.full(L, -1, dtype=np.int64)
    if path.jump_count:
        idx = np.searchsorted(times, path.jump_times)
        is_jump[idx] = True
        jump_mark[idx] = path.jump_marks
    extra_slots = np.cumsum(is_jump.astype(np.int64))
    node_first_slot = np.arange(L, dtype=np.int64) + extra_slots - is_jump.astype(np.int64)
    S = L + int(is_jump.sum())
    slot_times = np.empty(S, dtype=float)
    slot_kinds = np.empty(S, dtype=np.int8)
    slot_times[node_first_slot] = times
    slot_kinds[node_first_slot] = np.where(is_jump, KIND_LEFT, KIND_GRID)
    post = node_first_slot[is_jump] + 1
    slot_times[post] = times[is_jump]
    slot_kinds[post] = KIND_POST
    return MergedGrid(
        times=times,
        is_jump=is_jump,
        jump_mark=jump_mark,
        slot_times=slot_times,
        slot_kinds=slot_kinds,
        node_first_slot=node_first_slot,
    )


def coarsen_path(path: DrivingPath, factor: int) -> DrivingPath:
    """Derive the step-``factor*h`` path sharing this path's randomness.

    Retains the full jump record and all extra nodes; Brownian increments
    between retained nodes are summed.  Used by strong-convergence studies so
    that every resolution is driven by one common path.
    """
    if factor < 1 or path.steps % factor:
        raise ConfigurationError(f"coarsening factor {factor} must divide M={path.steps}")
    if factor == 1:
        return path
    coarse_uniform = path.uniform_times()[::factor]
    keep_times = np.unique(
        np.concatenate((coarse_uniform, path.jump_times, path.extra_times))
    )
    keep_idx = np.searchsorted(path.node_times, keep_times)
    if not np.array_equal(path.node_times[keep_idx], keep_times):
        raise GridMismatchError("coarse nodes missing from parent path")
    increments = np.add.reduceat(path.node_increments, keep_idx[:-1])
    return DrivingPath(
        T=path.T,
        h=path.h * factor,
        seed=path.seed,
        mark_count=path.mark_count,
        node_times=keep_times,
        node_increments=increments,
        jump_times=path.jump_times,
        jump_marks=path.jump_marks,
        extra_times=path.extra_times,
        rng_algorithm_id=path.rng_algorithm_id + f"+coarsen{factor}",
    )


def refine_path(path: DrivingPath, new_times) -> DrivingPath:
    """Insert deterministic nodes into an existing path.

    Each inserted node splits its containing interval by exact Brownian-bridge
    conditional sampling, driven by a dedicated stream derived from
    ``(path.seed, new_times)`` so the refinement is reproducible.  Nodes that
    already exist are ignored.
    """
    req = np.sort(np.unique(np.asarray(new_times, dtype=float)))
    req = req[(req > 0) & (req < path.T)]
    missing = req[~np.isin(req, path.node_times)]
    if not len(missing):
        return path
    rng = np.random.default_rng(
        np.random.SeedSequence(entropy=[path.seed & 0xFFFFFFFFFFFFFFFF, _REFINE_STREAM_TAG])
    )
    times = path.node_times.tolist()
    incs = path.node_increments.tolist()
    for s in missing:
        l = int(np.searchsorted(times, s)) - 1
        t0, t1 = times[l], times[l + 1]
        delta = t1 - t0
        alpha = (s - t0) / delta
        w = incs[l]
        left = alpha * w + rng.standard_normal() * np.sqrt(alpha * (1.0 - alpha) * delta)
        times.insert(l + 1, float(s))
        incs[l] = float(left)
        incs.insert(l + 1, float(w - left))
    return DrivingPath(
        T=path.T,
        h=path.h,
        seed=path.seed,
        mark_count=path.mark_count,
        node_times=np.asarray(times),
        node_increments=np.asarray(incs),
        jump_times=path.jump_times,
        jump_marks=path.jump_marks,
        extra_times=np.unique(np.concatenate((path.extra_times, missing))),
        rng_algorithm_id=path.rng_algorithm_id + "+refine",
    )


def derive_path_seed(master_seed: int, index: int) -> int:
    """Per-path seed for Monte Carlo stream ``index`` under one master seed.

    Uses seed-sequence spawning so the assignment is reproducible under any
    degree of parallelism and statistically independent across indices.
    """
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(index,))
    return int(ss.generate_state(1, np.uint64)[0])


# --- binary path dump ---------------------------------------------------------

_MAGIC = b"LVJPATHS"
_VERSION = 1


def save_path(path: DrivingPath, fileobj_or_name) -> None:
    """Write a versioned binary dump of the path for replay/debugging.

    Layout (version 1): magic, version, T, h, M, K, seed, then the M
    per-uniform-cell increments as float64, then the jump records, then the
    merged-grid section (extra nodes, node times, node increments) that makes
    the dump a bit-exact replay source.
    """
    own = isinstance(fileobj_or_name, (str, bytes)) or hasattr(fileobj_or_name, "__fspath__")
    fh = open(fileobj_or_name, "wb") if own else fileobj_or_name
    try:
        algo = path.rng_algorithm_id.encode("utf-8")
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", _VERSION))
        fh.write(
            struct.pack(
                "<ddQQQQQQ",
                path.T,
                path.h,
                path.steps,
                path.mark_count,
                path.seed,
                path.jump_count,
                len(path.extra_times),
                len(path.node_times),
            )
        )
        fh.write(np.ascontiguousarray(path.brownian_increments, dtype="<f8").tobytes())
        for tau, mark in zip(path.jump_times, path.jump_marks):
            fh.write(struct.pack("<dQ", float(tau), int(mark)))
        fh.write(np.ascontiguousarray(path.extra_times, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(path.node_times, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(path.node_increments, dtype="<f8").tobytes())
        fh.write(struct.pack("<I", len(algo)))
        fh.write(algo)
    finally:
        if own:
            fh.close()


def load_path(fileobj_or_name) -> DrivingPath:
    """Read a binary path dump; verifies magic, version and cell sums."""
    own = isinstance(fileobj_or_name, (str, bytes)) or hasattr(fileobj_or_name, "__fspath__")
    fh = open(fileobj_or_name, "rb") if own else fileobj_or_name
    try:
        if fh.read(8) != _MAGIC:
            raise ConfigurationError("not a path dump (bad magic)")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != _VERSION:
            raise ConfigurationError(f"unsupported path dump version {version}")
        T, h, M, K, seed, J, E, L = struct.unpack("<ddQQQQQQ", fh.read(8 * 8))
        cell_incs = np.frombuffer(fh.read(8 * M), dtype="<f8").copy()
        jumps = [struct.unpack("<dQ", fh.read(16)) for _ in range(J)]
        extra = np.frombuffer(fh.read(8 * E), dtype="<f8").copy()
        node_times = np.frombuffer(fh.read(8 * L), dtype="<f8").copy()
        node_incs = np.frombuffer(fh.read(8 * (L - 1)), dtype="<f8").copy()
        (alen,) = struct.unpack("<I", fh.read(4))
        algo = fh.read(alen).decode("utf-8")
        path = DrivingPath(
            T=T,
            h=h,
            seed=int(seed),
            mark_count=int(K),
            node_times=node_times,
            node_increments=node_incs,
            jump_times=np.asarray([t for t, _ in jumps], dtype=float),
            jump_marks=np.asarray([m for _, m in jumps], dtype=np.int64),
            extra_times=extra,
            rng_algorithm_id=algo,
        )
        if not np.array_equal(path.brownian_increments, cell_incs):
            raise ConfigurationError("path dump corrupt: cell sums do not match")
        return path
    finally:
        if own:
            fh.close()
