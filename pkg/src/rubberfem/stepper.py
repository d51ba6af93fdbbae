"""Backward-Euler / P1 Galerkin time stepping for the front-fixed problem.

Each step first advances the interface explicitly,

    dW = A0 (U^n(1) - sigma(W^n)/m0),     W^{n+1} = W^n + dt dW,

then solves one tridiagonal system for U^{n+1} (in increment form):

    (M/dt - (dW/W^{n+1}) C + S/(W^{n+1})^2) U^{n+1} = M U^n / dt + load,

with the boundary load taken from U^n (see :func:`assembly.boundary_load`).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numba import njit

from .assembly import ElementMatrices, assemble, boundary_load
from .linalg import PIVOT_TOL, _thomas, matvec
from .mesh import Mesh1D, P1Function, interpolate
from .model import DimensionlessParameters, PhysicalParameters, eval_b, eval_sigma

BLOWUP_LIMIT = 1e6


class StabilityBreakdown(RuntimeError):
    """The discrete solution left its admissible range; ``trajectory`` holds
    everything computed up to the failing step."""

    def __init__(self, step_index: int, reason: str, trajectory: "Trajectory | None" = None):
        super().__init__(f"stability breakdown at step {step_index}: {reason}")
        self.step_index = step_index
        self.reason = reason
        self.trajectory = trajectory


@dataclass(frozen=True, eq=False)
class DiscreteState:
    step_index: int
    tau: float
    u: P1Function
    w: float
    residual: float = 0.0

    def __post_init__(self):
        if not self.w > 0.0:
            raise ValueError(f"interface value must be positive, got {self.w!r}")
        if not np.all(np.isfinite(self.u.coeffs)):
            raise ValueError("nodal values must be finite")


def initial_state(d: DimensionlessParameters, mesh: Mesh1D) -> DiscreteState:
    return DiscreteState(step_index=0, tau=0.0, u=interpolate(d.u0, mesh), w=1.0)


def step_boundary(state: DiscreteState, d: DimensionlessParameters, dt: float) -> tuple[float, float]:
    """Explicit interface update; returns ``(w_next, dW)``."""
    return _boundary_update(float(state.u.coeffs[-1]), state.w, d, dt, state.step_index)


def _boundary_update(u_at_1, w, d, dt, n):
    dW = d.A0 * (u_at_1 - eval_sigma(d, w))
    w_next = w + dt * dW
    if not w_next > 0.0:
        raise StabilityBreakdown(n + 1, f"interface value W={w_next!r} is not positive")
    return w_next, dW


class _Operator:
    """Band arrays of M/dt, C and S, kept for repeated assembly of the step matrix."""

    def __init__(self, mats: ElementMatrices, dt: float):
        self.dt = dt
        m, c, s = mats.mass, mats.convection, mats.stiffness
        self.m_dt = self._padded(m) / dt
        self.c = self._padded(c)
        self.s = self._padded(s)
        self.mass = m
        self.stiffness = s
        self.work = np.empty((6, m.n))

    @staticmethod
    def _padded(a):
        return np.array([np.append(a.lower, 0.0), a.diag, np.append(a.upper, 0.0)])


@njit(cache=True)
def _step_kernel(u, load, c1, c2, m_dt, c, s, out, work):
    """Assemble and solve one step; returns (status, residual, peak, finite).

    Solves for the increment, A (U^{n+1} - U^n) = load - K U^n with
    K = -c1 C + c2 S.  This is algebraically the same system, but constant
    states with no boundary load are reproduced exactly.  Bands are stored padded to length n
    (rows 0: lower, 1: diag, 2: upper).  status is -1 on success, else the
    row of a vanishing pivot.
    """
    n = u.size
    lo = work[0]
    di = work[1]
    up = work[2]
    rhs = work[3]
    for i in range(n):
        kl = -c1 * c[0, i] + c2 * s[0, i]
        ku = -c1 * c[2, i] + c2 * s[2, i]
        lo[i] = m_dt[0, i] + kl
        di[i] = m_dt[1, i] - c1 * c[1, i] + c2 * s[1, i]
        up[i] = m_dt[2, i] + ku
        # C and S annihilate constants, so K U is formed from differences
        r = 0.0
        if i < n - 1:
            r += ku * (u[i + 1] - u[i])
        if i > 0:
            r += (-c1 * c[0, i - 1] + c2 * s[0, i - 1]) * (u[i - 1] - u[i])
        rhs[i] = load[i] - r
    status = _thomas(lo, di, up, rhs, out, work[4], work[5], PIVOT_TOL)
    if status >= 0:
        return status, 0.0, 0.0, True
    res = 0.0
    peak = 0.0
    finite = True
    for i in range(n):
        v = out[i]
        a = di[i] * v - rhs[i]
        if i < n - 1:
            a += up[i] * out[i + 1]
        if i > 0:
            a += lo[i - 1] * out[i - 1]
        res = max(res, abs(a))
    for i in range(n):
        v = u[i] + out[i]
        out[i] = v
        if not np.isfinite(v):
            finite = False
        peak = max(peak, abs(v))
    return -1, res, peak, finite


def _advance(u: np.ndarray, w: float, n: int, op: _Operator, d: DimensionlessParameters,
             h_max: float):
    """One step on raw arrays: returns ``(u_next, w_next, dW, residual)``."""
    dt = op.dt
    w_next, dW = _boundary_update(float(u[-1]), w, d, dt, n)
    if w_next > h_max:
        raise StabilityBreakdown(n + 1, f"interface value W={w_next!r} exceeds h_max={h_max!r}")
    b_now = eval_b(d, min(n * dt, d.T))
    load = boundary_load(d.Bi, b_now, d.H, float(u[0]), w_next, dW, float(u[-1]), u.size)
    u_next = np.empty_like(u)
    status, residual, peak, finite = _step_kernel(
        u, load, dW / w_next, 1.0 / (w_next * w_next), op.m_dt, op.c, op.s, u_next, op.work)
    if status >= 0:
        raise StabilityBreakdown(n + 1, f"zero pivot in row {status}")
    if not finite:
        raise StabilityBreakdown(n + 1, "non-finite nodal values")
    if peak > BLOWUP_LIMIT:
        raise StabilityBreakdown(n + 1, f"|U| reached {peak:.3g}")
    return u_next, w_next, dW, residual


def step(state: DiscreteState, mats: ElementMatrices, d: DimensionlessParameters,
         dt: float) -> DiscreteState:
    if not dt > 0.0:
        raise ValueError(f"time step must be positive, got {dt!r}")
    op = _Operator(mats, dt)
    u, w, _, res = _advance(np.array(state.u.coeffs), state.w, state.step_index, op, d, d.h_max)
    return DiscreteState(step_index=state.step_index + 1, tau=(state.step_index + 1) * dt,
                         u=P1Function(state.u.mesh, u), w=w, residual=res)


class Stepper:
    """Streaming driver: holds the current nodal vector and interface value.

    Used directly by the convergence studies, which compare several runs step
    by step instead of storing full trajectories.
    """

    def __init__(self, d: DimensionlessParameters, mesh: Mesh1D, dt: float,
                 mats: ElementMatrices | None = None):
        if not dt > 0.0:
            raise ValueError(f"time step must be positive, got {dt!r}")
        self.d, self.mesh, self.dt = d, mesh, dt
        self.mats = mats if mats is not None else assemble(mesh)
        self._op = _Operator(self.mats, dt)
        s0 = initial_state(d, mesh)
        self.u = np.array(s0.u.coeffs)
        self.w = 1.0
        self.n = 0
        self.last_dW = 0.0
        self.last_residual = 0.0

    @property
    def tau(self) -> float:
        return self.n * self.dt

    def advance(self) -> None:
        self.u, self.w, self.last_dW, self.last_residual = _advance(
            self.u, self.w, self.n, self._op, self.d, self.d.h_max)
        self.n += 1

    def state(self) -> DiscreteState:
        return DiscreteState(self.n, self.tau, P1Function(self.mesh, self.u.copy()), self.w,
                             self.last_residual)

    def l2_sq(self) -> float:
        return float(self.u @ matvec(self._op.mass, self.u))

    def grad_sq(self) -> float:
        return float(self.u @ matvec(self._op.stiffness, self.u))


@dataclass(eq=False)
class Trajectory:
    """Recorded states plus per-step diagnostics (every step, regardless of
    ``record_every``)."""

    states: list[DiscreteState]
    params: DimensionlessParameters
    mesh: Mesh1D
    dt: float
    record_every: int = 1
    w_history: np.ndarray = field(default_factory=lambda: np.zeros(0))
    u1_history: np.ndarray = field(default_factory=lambda: np.zeros(0))
    l2_sq: np.ndarray = field(default_factory=lambda: np.zeros(0))
    grad_sq: np.ndarray = field(default_factory=lambda: np.zeros(0))
    u_min: np.ndarray = field(default_factory=lambda: np.zeros(0))
    u_max: np.ndarray = field(default_factory=lambda: np.zeros(0))
    max_residual: float = 0.0
    complete: bool = True

    @property
    def n_steps(self) -> int:
        return len(self.w_history) - 1

    @classmethod
    def from_states(cls, states: list[DiscreteState], params: DimensionlessParameters,
                    dt: float) -> "Trajectory":
        """Build a fully recorded trajectory (and its diagnostics) from states."""
        mesh = states[0].u.mesh
        mats = assemble(mesh)
        us = [s.u.coeffs for s in states]
        return cls(
            states=list(states), params=params, mesh=mesh, dt=dt, record_every=1,
            w_history=np.array([s.w for s in states]),
            u1_history=np.array([u[-1] for u in us]),
            l2_sq=np.array([u @ matvec(mats.mass, u) for u in us]),
            grad_sq=np.array([u @ matvec(mats.stiffness, u) for u in us]),
            u_min=np.array([u.min() for u in us]),
            u_max=np.array([u.max() for u in us]),
            max_residual=max(s.residual for s in states),
        )

    def interface_nonincreasing_steps(self) -> np.ndarray:
        """Step indices n (1-based) with W^n < W^{n-1}."""
        return np.flatnonzero(np.diff(self.w_history) < 0.0) + 1


def n_steps_for(T: float, dt: float) -> int:
    M = int(round(T / dt))
    if M < 1 or abs(M * dt - T) > 1e-12 * max(T, 1.0):
        raise ValueError(f"dt={dt!r} does not divide T={T!r}")
    return M


def run(d: DimensionlessParameters, mesh: Mesh1D, dt: float, record_every: int = 1,
        n_steps: int | None = None,
        on_step: Optional[Callable[[Stepper], None]] = None) -> Trajectory:
    """Integrate from tau = 0 to T (or for ``n_steps`` steps).

    Raises :class:`StabilityBreakdown` with the partial trajectory attached.
    """
    if record_every < 1:
        raise ValueError("record_every must be >= 1")
    M = n_steps_for(d.T, dt) if n_steps is None else int(n_steps)
    if n_steps is not None and not (M >= 0 and M * dt <= d.T * (1 + 1e-12)):
        raise ValueError(f"{M} steps of {dt!r} overrun T={d.T!r}")
    st = Stepper(d, mesh, dt)
    w_hist = np.empty(M + 1)
    u1 = np.empty(M + 1)
    l2 = np.empty(M + 1)
    gr = np.empty(M + 1)
    umin = np.empty(M + 1)
    umax = np.empty(M + 1)
    states = [st.state()]
    max_res = 0.0

    def record(n):
        w_hist[n] = st.w
        u1[n] = st.u[-1]
        l2[n] = st.l2_sq()
        gr[n] = st.grad_sq()
        umin[n] = st.u.min()
        umax[n] = st.u.max()

    def build(upto, complete):
        return Trajectory(states=states, params=d, mesh=mesh, dt=dt, record_every=record_every,
                          w_history=w_hist[:upto + 1].copy(), u1_history=u1[:upto + 1].copy(),
                          l2_sq=l2[:upto + 1].copy(), grad_sq=gr[:upto + 1].copy(),
                          u_min=umin[:upto + 1].copy(), u_max=umax[:upto + 1].copy(),
                          max_residual=max_res, complete=complete)

    record(0)
    for n in range(1, M + 1):
        try:
            st.advance()
        except StabilityBreakdown as exc:
            exc.trajectory = build(n - 1, complete=False)
            raise
        record(n)
        max_res = max(max_res, st.last_residual)
        if n % record_every == 0 or n == M:
            states.append(st.state())
        if on_step is not None:
            on_step(st)
    return build(M, complete=True)


@dataclass(frozen=True, eq=False)
class PhysicalSnapshot:
    t: float
    s: float
    x_nodes: np.ndarray
    m_values: np.ndarray


def to_physical(traj: Trajectory, p: PhysicalParameters) -> list[PhysicalSnapshot]:
    """Undo the scalings: t = s0^2 tau / D, s = s0 W, x = s y, m = m0 U."""
    out = []
    for st in traj.states:
        s = p.s0 * st.w
        out.append(PhysicalSnapshot(t=p.s0 ** 2 * st.tau / p.D, s=s,
                                    x_nodes=s * traj.mesh.nodes, m_values=p.m0 * st.u.coeffs))
    return out


def physical_time(tau: float, p: PhysicalParameters) -> float:
    return p.s0 ** 2 * tau / p.D


__all__ = [
    "StabilityBreakdown", "DiscreteState", "Trajectory", "PhysicalSnapshot", "Stepper",
    "initial_state", "step_boundary", "step", "run", "to_physical", "physical_time",
    "n_steps_for", "BLOWUP_LIMIT",
]
