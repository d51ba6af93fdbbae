"""Command-line driver.

    rubberfem --config run.cfg [--mode MODE] [--out DIR] [--quiet]

Exit status: 0 success, 1 I/O failure, 2 configuration error,
3 stability breakdown, 4 invariant violation.
"""
from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import replace
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from . import analysis
from .config import MODES, ConfigError, RunConfig, load_config
from .mesh import uniform_mesh
from .model import Constant, validate_assumptions
from .stepper import StabilityBreakdown, Trajectory, n_steps_for, physical_time, run, to_physical

EXIT_OK, EXIT_IO, EXIT_CONFIG, EXIT_BREAKDOWN, EXIT_INVARIANT = 0, 1, 2, 3, 4


def fmt(x) -> str:
    """Shortest decimal that parses back to the same double."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow(["" if v is None else v if isinstance(v, str) else fmt(v) for v in row])
    return path


def _say(quiet: bool):
    def say(msg: str):
        if not quiet:
            print(msg, flush=True)
    return say


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def write_trajectory(traj: Trajectory, cfg: RunConfig, out: Path, suffix: str = "") -> list[Path]:
    p = cfg.physical()
    n_nodes = traj.mesh.n_nodes
    header = ["step", "tau", "t_phys", "W", "s_phys"] + [f"U{i}" for i in range(n_nodes)]
    rows = ([s.step_index, s.tau, physical_time(s.tau, p), s.w, p.s0 * s.w, *s.u.coeffs]
            for s in traj.states)
    files = [write_csv(out / f"trajectory.csv{suffix}", header, rows)]
    taus = np.minimum(np.arange(len(traj.w_history)) * traj.dt, traj.params.T)
    files.append(write_csv(out / f"interface.csv{suffix}", ["step", "tau", "W"],
                           zip(range(len(taus)), taus, traj.w_history)))
    return files


def cmd_simulate(cfg: RunConfig, out: Path, quiet: bool = False) -> int:
    say = _say(quiet)
    d = cfg.dimensionless()
    report = validate_assumptions(d)
    say(str(report))
    mesh = uniform_mesh(cfg.n_nodes)
    M = n_steps_for(d.T, cfg.dt)
    say(f"simulate: N={cfg.n_nodes}, dt={cfg.dt!r}, {M} steps to tau={d.T!r}")
    try:
        traj = run(d, mesh, cfg.dt, record_every=min(cfg.record_every, max(M, 1)))
    except StabilityBreakdown as exc:
        say(f"error: {exc}")
        if exc.trajectory is not None:
            for f in write_trajectory(exc.trajectory, cfg, out, suffix=".partial"):
                say(f"wrote {f}")
        return EXIT_BREAKDOWN
    for f in write_trajectory(traj, cfg, out):
        say(f"wrote {f}")
    p = cfg.physical()
    snaps = to_physical(traj, p)
    from . import plotting

    t = physical_time(np.arange(len(traj.w_history)) * cfg.dt, p)
    say(f"wrote {plotting.interface_figure(t, p.s0 * traj.w_history, out / 'interface.png')}")
    say(f"wrote {plotting.profile_figure(snaps, out / 'profiles.png')}")
    say(f"final: t={snaps[-1].t:.6g} min, s={snaps[-1].s:.6g} mm, W={traj.states[-1].w:.6g}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# convergence
# ---------------------------------------------------------------------------

def write_table(table: analysis.ConvergenceTable, path: Path) -> Path:
    rows = ([r.resolution if table.protocol == "time" else int(r.resolution),
             r.err_u, r.order_u, r.err_w, r.order_w] for r in table.rows)
    return write_csv(path, ["resolution", "err_u", "order_u", "err_w", "order_w"], rows)


def cmd_convergence(cfg: RunConfig, out: Path, quiet: bool = False) -> int:
    say = _say(quiet)
    d = cfg.dimensionless()
    progress = None if quiet else say
    try:
        if cfg.mode == "convergence-space":
            table = analysis.space_study(d, cfg.space_dt, cfg.space_nodes,
                                         cfg.space_reference_nodes, progress)
            name = "table_space"
        else:
            table = analysis.time_study(d, cfg.time_nodes, cfg.time_dt, cfg.time_levels, progress)
            name = "table_time"
    except StabilityBreakdown as exc:
        say(f"error: {exc}")
        return EXIT_BREAKDOWN
    say(table.format())
    say(f"wrote {write_table(table, out / f'{name}.csv')}")
    from . import plotting

    say(f"wrote {plotting.convergence_figure(table, out / f'{name}.png')}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# invariant suite
# ---------------------------------------------------------------------------

def _check_rows(cfg: RunConfig, say, rows: list[tuple[str, bool, str, str]]) -> None:
    """Append ``(name, passed, measured, required)`` per invariant to ``rows``."""
    d = cfg.dimensionless()

    report = validate_assumptions(d)
    rows.append(("assumptions", report.passed, f"{len(report.violations)} violation(s)", "0"))

    mesh = uniform_mesh(cfg.n_nodes)
    M = n_steps_for(d.T, cfg.dt)
    say(f"check: main run N={cfg.n_nodes}, dt={cfg.dt!r}, {M} steps")
    first = run(d, mesh, cfg.dt, record_every=max(M, 1))
    second = run(d, mesh, cfg.dt, record_every=max(M, 1))
    same = (np.array_equal(first.w_history, second.w_history)
            and np.array_equal(first.states[-1].u.coeffs, second.states[-1].u.coeffs))
    rows.append(("determinism", same, "bitwise equal" if same else "runs differ", "bitwise equal"))

    w = first.w_history
    sig = np.array([float(d.sigma_scaled(x)) for x in w[:-1]])
    driven = first.u1_history[:-1] >= sig
    drops = int(np.count_nonzero(driven & (np.diff(w) < 0.0)))
    rows.append(("monotonicity", drops == 0, f"{drops} decrease(s) in {int(driven.sum())} driven step(s)", "0"))

    b_hi = float(np.max(d.b_scaled(np.linspace(0.0, d.T, 2001))))
    ceiling = 1.05 * b_hi / d.H
    lo, hi = float(first.u_min.min()), float(first.u_max.max())
    rows.append(("bounds", lo >= 0.0 and hi <= ceiling, f"[{lo:.6g}, {hi:.6g}]",
                 f"[0, {ceiling:.6g}]"))

    frozen = replace(d, Bi=0.0, A0=0.0, u0=Constant(0.37))
    n_fixed = min(M, 200)
    traj = run(frozen, mesh, cfg.dt, record_every=max(n_fixed, 1), n_steps=n_fixed)
    dev = max(float(np.max(np.abs(traj.states[-1].u.coeffs - 0.37))),
              float(np.max(np.abs(traj.w_history - 1.0))))
    rows.append(("fixed point", dev <= 1e-12, f"max deviation {dev:.3g}", "1e-12"))

    say(f"check: energy sweep N={list(cfg.energy_nodes)}, dt={cfg.energy_dt!r}")
    sweep = analysis.energy_sweep(d, cfg.energy_nodes, cfg.energy_dt)
    spread = sweep.relative_spread
    vals = " ".join(f"{v:.6g}" for v in sweep.values)
    rows.append(("energy band", spread < 0.05, f"spread {spread:.3%} ({vals})", "< 5%"))


def cmd_check(cfg: RunConfig, out: Path, quiet: bool = False) -> int:
    say = _say(quiet)
    rows: list[tuple[str, bool, str, str]] = []
    status = EXIT_OK
    try:
        _check_rows(cfg, say, rows)
    except StabilityBreakdown as exc:
        rows.append(("stability", False, str(exc), "no breakdown"))
        status = EXIT_BREAKDOWN
    width = max(len(r[0]) for r in rows)
    for name, ok, measured, bound in rows:
        print(f"{'PASS' if ok else 'FAIL'}  {name:<{width}}  {measured}  (required {bound})")
    write_csv(out / "check_report.csv", ["invariant", "status", "measured", "required"],
              ((n, "pass" if ok else "fail", m, b) for n, ok, m, b in rows))
    if status == EXIT_OK and not all(r[1] for r in rows):
        status = EXIT_INVARIANT
    return status


COMMANDS = {
    "simulate": cmd_simulate,
    "convergence-space": cmd_convergence,
    "convergence-time": cmd_convergence,
    "check-invariants": cmd_check,
}


def _step_sizes(cfg: RunConfig) -> tuple[float, ...]:
    """Every time step the chosen mode will use; each must divide T."""
    if cfg.mode == "simulate":
        return (cfg.dt,)
    if cfg.mode == "check-invariants":
        return (cfg.dt, cfg.energy_dt)
    if cfg.mode == "convergence-space":
        return (cfg.space_dt,)
    return tuple(cfg.time_dt / 2 ** lv for lv in range(cfg.time_levels + 1))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rubberfem",
                                 description="Front-fixed FEM for diffusant uptake in rubber")
    ap.add_argument("--config", required=True, help="key = value configuration file")
    ap.add_argument("--mode", choices=MODES, help="overrides the mode key of the config")
    ap.add_argument("--out", help="output directory (default: output_dir from the config)")
    ap.add_argument("--quiet", action="store_true", help="suppress progress messages")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.mode)
        T = cfg.dimensionless().T
        for dt in _step_sizes(cfg):
            n_steps_for(T, dt)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out or cfg.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[cfg.mode](cfg, out, args.quiet)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
