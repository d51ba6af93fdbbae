"""Figures written next to the CSV output.

Uses the object-oriented matplotlib API with the Agg canvas, so nothing here
touches pyplot state or needs a display.
"""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .analysis import ConvergenceTable
from .stepper import PhysicalSnapshot

STYLE = {
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.4,
    "lines.markersize": 5,
}


def _figure(width=7.0, height=3.0, ncols=1):
    import matplotlib

    with matplotlib.rc_context(STYLE):
        fig = Figure(figsize=(width, height), layout="constrained")
        FigureCanvasAgg(fig)
        axes = fig.subplots(1, ncols)
    return fig, np.atleast_1d(axes)


def _save(fig: Figure, path: Path) -> Path:
    fig.savefig(path, dpi=150)
    return path


def _slope_guide(ax, x, y, order=1.0):
    """Dashed reference line of the given slope through the first data point."""
    x = np.asarray(x, dtype=float)
    ax.loglog(x, y[0] * (x / x[0]) ** order, "k--", lw=0.9, label=f"slope {order:g}")


def convergence_figure(table: ConvergenceTable, path: str | Path) -> Path:
    """Log-log error plot: interface error left, concentration error right."""
    fig, (ax_w, ax_u) = _figure(ncols=2)
    res = np.array(table.resolutions, dtype=float)
    if table.protocol == "space":
        x, xlabel = 1.0 / res, "mesh size 1/N"
    else:
        x, xlabel = res, r"time step $\Delta\tau$"
    for ax, errs, label in ((ax_w, [r.err_w for r in table.rows], "interface error"),
                            (ax_u, [r.err_u for r in table.rows], "concentration L2 error")):
        errs = np.array(errs)
        ax.loglog(x, errs, "o-", label=label)
        if np.all(errs > 0):
            _slope_guide(ax, x, errs)
        ax.set_xlabel(xlabel)
        ax.set_title(label)
        ax.legend(loc="lower right", frameon=False)
    return _save(fig, Path(path))


def interface_figure(t: Sequence[float], s: Sequence[float], path: str | Path) -> Path:
    fig, (ax,) = _figure(width=4.5, height=3.0)
    ax.plot(t, s)
    ax.set_xlabel("t [min]")
    ax.set_ylabel("s(t) [mm]")
    ax.set_title("penetration front")
    return _save(fig, Path(path))


def profile_figure(snapshots: Sequence[PhysicalSnapshot], path: str | Path, n_curves: int = 6) -> Path:
    fig, (ax,) = _figure(width=4.5, height=3.0)
    picks = np.unique(np.linspace(0, len(snapshots) - 1, min(n_curves, len(snapshots))).astype(int))
    for i in picks:
        snap = snapshots[i]
        ax.plot(snap.x_nodes, snap.m_values, label=f"t = {snap.t:.3g} min")
    ax.set_xlabel("x [mm]")
    ax.set_ylabel(r"m [g/mm$^3$]")
    ax.set_title("concentration profiles")
    ax.legend(frameon=False, fontsize=7)
    return _save(fig, Path(path))
