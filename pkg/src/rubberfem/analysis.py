"""Error measures, observed orders and the space/time refinement studies.

No exact solution is available, so every study compares coarse runs against a
fine run of the same scheme: a 1280-node mesh for the space study, a time step
64 times smaller for the time study.  Errors are maxima over every time level
of the coarse run,

    err_u = max_n ||U^n - u^n||_{L2(0,1)},     err_w = max_n |W^n - h^n|.

The studies advance all runs in lockstep and accumulate these maxima on the
fly, so no trajectory is ever stored.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .mesh import CrossMeshNorm, Mesh1D, uniform_mesh
from .model import DimensionlessParameters, eval_sigma
from .stepper import StabilityBreakdown, Stepper, Trajectory, n_steps_for, run

SPACE_NODES = (20, 40, 80, 160, 320, 640)
SPACE_REFERENCE_NODES = 1280
SPACE_DT = 1e-4
TIME_NODES = 320
TIME_DT = 1e-3
TIME_LEVELS = 6

Progress = Optional[Callable[[str], None]]


@dataclass(frozen=True)
class ErrorRecord:
    resolution: float
    err_u: float
    err_w: float

    def __post_init__(self):
        for v in (self.err_u, self.err_w):
            if not (math.isfinite(v) and v >= 0.0):
                raise ValueError(f"errors must be finite and nonnegative, got {v!r}")


@dataclass(frozen=True)
class ConvergenceRow:
    resolution: float
    err_u: float
    order_u: Optional[float]
    err_w: float
    order_w: Optional[float]


@dataclass
class ConvergenceTable:
    rows: list[ConvergenceRow]
    protocol: str  # "space" or "time"
    reference_spec: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def resolutions(self) -> list[float]:
        return [r.resolution for r in self.rows]

    def orders_u(self) -> list[Optional[float]]:
        return [r.order_u for r in self.rows[:-1]]

    def orders_w(self) -> list[Optional[float]]:
        return [r.order_w for r in self.rows[:-1]]

    def format(self) -> str:
        head = "N" if self.protocol == "space" else "dt"
        lines = [f"{head:>12} {'err_u':>14} {'order_u':>8} {'err_w':>14} {'order_w':>8}"]
        for r in self.rows:
            ou = "" if r.order_u is None else f"{r.order_u:.3f}"
            ow = "" if r.order_w is None else f"{r.order_w:.3f}"
            res = f"{int(r.resolution)}" if self.protocol == "space" else f"{r.resolution:g}"
            lines.append(f"{res:>12} {r.err_u:14.7e} {ou:>8} {r.err_w:14.7e} {ow:>8}")
        if self.reference_spec:
            lines.append(f"reference: {self.reference_spec}")
        return "\n".join(lines)


def observed_order(err_coarse: float, err_fine: float, ratio: float) -> float:
    """``log(err_coarse / err_fine) / log(ratio)``."""
    if not (err_coarse > 0.0 and err_fine > 0.0):
        raise ValueError(f"errors must be positive, got {err_coarse!r}, {err_fine!r}")
    if not ratio > 1.0:
        raise ValueError(f"refinement ratio must exceed 1, got {ratio!r}")
    return math.log(err_coarse / err_fine) / math.log(ratio)


def build_table(records: Sequence[ErrorRecord], protocol: str, reference_spec: str = "",
                **meta) -> ConvergenceTable:
    """Attach orders between consecutive records whose resolutions differ by 2x.

    An order is ``None`` when the pair is not a halving or either error is zero.
    """
    rows = []
    for i, rec in enumerate(records):
        ou = ow = None
        if i + 1 < len(records):
            nxt = records[i + 1]
            a, b = rec.resolution, nxt.resolution
            ratio = b / a if protocol == "space" else a / b
            if abs(ratio - 2.0) < 1e-9:
                if rec.err_u > 0 and nxt.err_u > 0:
                    ou = observed_order(rec.err_u, nxt.err_u, 2.0)
                if rec.err_w > 0 and nxt.err_w > 0:
                    ow = observed_order(rec.err_w, nxt.err_w, 2.0)
        rows.append(ConvergenceRow(rec.resolution, rec.err_u, ou, rec.err_w, ow))
    return ConvergenceTable(rows=rows, protocol=protocol, reference_spec=reference_spec,
                            meta=dict(meta))


def error_against_reference(traj: Trajectory, ref: Trajectory) -> ErrorRecord:
    """Max-in-time errors of a fully recorded trajectory against a reference.

    The reference time grid must contain the trajectory's (integer step ratio)
    and both must end at the same time.  Meshes may differ.
    """
    if traj.record_every != 1 or ref.record_every != 1:
        raise ValueError("error_against_reference needs trajectories recorded at every step")
    ratio = traj.dt / ref.dt
    r = int(round(ratio))
    if r < 1 or abs(ratio - r) > 1e-9 * ratio:
        raise ValueError(f"time grids do not coincide (dt ratio {ratio!r})")
    if traj.n_steps * r != ref.n_steps:
        raise ValueError("trajectory and reference cover different time spans")
    norm = CrossMeshNorm(traj.mesh, ref.mesh)
    err_u = max(norm.l2(s.u.coeffs, ref.states[s.step_index * r].u.coeffs) for s in traj.states)
    err_w = float(np.max(np.abs(traj.w_history - ref.w_history[::r])))
    return ErrorRecord(resolution=traj.mesh.n_nodes, err_u=err_u, err_w=err_w)


class _Tracked:
    """A coarse run compared against the reference every ``stride`` reference steps."""

    def __init__(self, stepper: Stepper, stride: int, norm: Callable[[np.ndarray, np.ndarray], float],
                 resolution: float):
        self.stepper, self.stride, self.norm, self.resolution = stepper, stride, norm, resolution
        self.err_u = 0.0
        self.err_w = 0.0
        self.u_min = self.u_max = float(stepper.u[0])
        self.w_drops = 0
        self.driven_drops = 0
        self._w_prev = stepper.w
        self._driven = self._is_driven()

    def _is_driven(self) -> bool:
        st = self.stepper
        return float(st.u[-1]) >= eval_sigma(st.d, st.w)

    def compare(self, ref: Stepper):
        u = self.stepper.u
        self.err_u = max(self.err_u, self.norm(u, ref.u))
        self.err_w = max(self.err_w, abs(self.stepper.w - ref.w))
        self.u_min = min(self.u_min, float(u.min()))
        self.u_max = max(self.u_max, float(u.max()))
        if self.stepper.w < self._w_prev:
            self.w_drops += 1
            self.driven_drops += self._driven
        self._w_prev = self.stepper.w
        self._driven = self._is_driven()

    def summary(self) -> dict:
        return {"u_min": self.u_min, "u_max": self.u_max, "w_drops": self.w_drops,
                "driven_drops": self.driven_drops}


def _lockstep(ref: Stepper, tracked: list[_Tracked], n_ref_steps: int, progress: Progress,
              label: str) -> tuple[list[ErrorRecord], dict]:
    """Advance everything together; returns the error records and per-run
    ``{resolution: {u_min, u_max, w_drops, driven_drops}}`` ranges, the reference
    under ``"reference"``.  ``driven_drops`` counts decreases of W on steps that
    started with U(1) >= sigma(W)."""
    ref_range = _Tracked(ref, 1, lambda a, b: 0.0, "reference")
    for t in tracked:
        t.compare(ref)  # n = 0
    ref_range.compare(ref)
    report_every = max(1, n_ref_steps // 10)
    for n in range(1, n_ref_steps + 1):
        ref.advance()
        ref_range.compare(ref)
        for t in tracked:
            if n % t.stride == 0:
                try:
                    t.stepper.advance()
                except StabilityBreakdown as exc:
                    exc.args = (f"{label} run at resolution {t.resolution}: {exc}",)
                    raise
                t.compare(ref)
        if progress is not None and n % report_every == 0:
            progress(f"{label}: {100 * n // n_ref_steps}% ({n}/{n_ref_steps} reference steps)")
    ranges = {t.resolution: t.summary() for t in tracked}
    ranges["reference"] = ref_range.summary()
    return [ErrorRecord(t.resolution, t.err_u, t.err_w) for t in tracked], ranges


def space_study(d: DimensionlessParameters, dt: float = SPACE_DT,
                node_counts: Sequence[int] = SPACE_NODES,
                reference_nodes: int = SPACE_REFERENCE_NODES,
                progress: Progress = None) -> ConvergenceTable:
    """Fixed time step, uniform meshes of increasing node count vs. a fine mesh."""
    M = n_steps_for(d.T, dt)
    ref_mesh = uniform_mesh(reference_nodes)
    ref = Stepper(d, ref_mesh, dt)
    tracked = []
    for N in node_counts:
        mesh = uniform_mesh(N)
        norm = CrossMeshNorm(mesh, ref_mesh)
        tracked.append(_Tracked(Stepper(d, mesh, dt), 1, norm.l2, N))
    records, ranges = _lockstep(ref, tracked, M, progress, "space study")
    return build_table(records, "space", f"N={reference_nodes}, dt={dt!r}",
                       dt=dt, reference_nodes=reference_nodes, w_final_reference=ref.w,
                       ranges=ranges)


def time_study(d: DimensionlessParameters, n_nodes: int = TIME_NODES, dt: float = TIME_DT,
               levels: int = TIME_LEVELS, progress: Progress = None) -> ConvergenceTable:
    """Fixed mesh, time steps dt, dt/2, ..., dt/2**(levels-1) vs. dt/2**levels."""
    mesh = uniform_mesh(n_nodes)
    dt_ref = dt / 2 ** levels
    M = n_steps_for(d.T, dt_ref)
    ref = Stepper(d, mesh, dt_ref)
    mass = ref.mats.mass

    def same_mesh_l2(a, b):
        e = a - b
        return math.sqrt(max(float(e @ (mass.diag * e)) + 2.0 * float(np.sum(mass.upper * e[:-1] * e[1:])), 0.0))

    tracked = [_Tracked(Stepper(d, mesh, dt / 2 ** lv, mats=ref.mats), 2 ** (levels - lv),
                        same_mesh_l2, dt / 2 ** lv) for lv in range(levels)]
    records, ranges = _lockstep(ref, tracked, M, progress, "time study")
    return build_table(records, "time", f"N={n_nodes}, dt={dt_ref!r}",
                       n_nodes=n_nodes, dt_reference=dt_ref, w_final_reference=ref.w,
                       ranges=ranges)


def energy_report(traj: Trajectory) -> float:
    """``max_{n>=1} ||U^n||^2 + dt * sum_{n>=1} ||dU^n/dy||^2``; for a single state,
    ``||U^0||^2``."""
    if traj.n_steps < 0 or len(traj.l2_sq) == 0:
        raise ValueError("empty trajectory")
    if traj.n_steps == 0:
        return float(traj.l2_sq[0])
    return float(np.max(traj.l2_sq[1:]) + traj.dt * np.sum(traj.grad_sq[1:]))


@dataclass(frozen=True)
class EnergySweep:
    node_counts: tuple[int, ...]
    values: tuple[float, ...]

    @property
    def relative_spread(self) -> float:
        return (max(self.values) - min(self.values)) / min(self.values)


def energy_sweep(d: DimensionlessParameters, node_counts: Sequence[int] = (40, 80, 160, 320),
                 dt: float = 1e-3) -> EnergySweep:
    vals = tuple(energy_report(run(d, uniform_mesh(N), dt, record_every=n_steps_for(d.T, dt)))
                 for N in node_counts)
    return EnergySweep(tuple(node_counts), vals)


@dataclass(frozen=True)
class StabilityProbe:
    dt: float
    outcome: str  # "breakdown", "non-monotone" or "none"
    detail: str
    tried: tuple[float, ...]


def stability_probe(d: DimensionlessParameters, mesh: Mesh1D, dt_start: float = 1e-2,
                    max_doublings: int = 16) -> StabilityProbe:
    """Double the time step until the run aborts or the interface stops growing.

    Each trial covers ``floor(T / dt)`` steps.
    """
    dt = dt_start
    tried = []
    for _ in range(max_doublings + 1):
        tried.append(dt)
        n = int(math.floor(d.T / dt * (1 + 1e-12)))
        if n < 1:
            break
        try:
            traj = run(d, mesh, dt, record_every=n, n_steps=n)
        except StabilityBreakdown as exc:
            return StabilityProbe(dt, "breakdown", str(exc), tuple(tried))
        bad = traj.interface_nonincreasing_steps()
        if bad.size:
            return StabilityProbe(dt, "non-monotone",
                                  f"W decreased at {bad.size} step(s), first at step {bad[0]}",
                                  tuple(tried))
        dt *= 2.0
    return StabilityProbe(dt, "none", "no breakdown detected", tuple(tried))
