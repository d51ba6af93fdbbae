"""Meshes on [0, 1] and continuous piecewise-linear (P1) functions on them."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Mesh1D:
    nodes: np.ndarray
    element_sizes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        nodes = _frozen(self.nodes)
        if nodes.ndim != 1 or nodes.size < 2:
            raise ValueError("a mesh needs at least two nodes")
        if nodes[0] != 0.0 or nodes[-1] != 1.0:
            raise ValueError("mesh must span exactly [0, 1]")
        if np.any(np.diff(nodes) <= 0.0):
            raise ValueError("mesh nodes must be strictly increasing")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "element_sizes", _frozen(np.diff(nodes)))

    @property
    def n_nodes(self) -> int:
        return self.nodes.size

    @property
    def k_max(self) -> float:
        return float(self.element_sizes.max())

    def __len__(self):
        return self.nodes.size

    def __repr__(self):
        return f"Mesh1D(n_nodes={self.n_nodes}, k_max={self.k_max:.6g})"


def uniform_mesh(n_nodes: int) -> Mesh1D:
    if int(n_nodes) != n_nodes or n_nodes < 2:
        raise ValueError(f"need an integer n_nodes >= 2, got {n_nodes!r}")
    n = int(n_nodes)
    return Mesh1D(np.arange(n) / (n - 1))


@dataclass(frozen=True, eq=False)
class P1Function:
    mesh: Mesh1D
    coeffs: np.ndarray

    def __post_init__(self):
        c = _frozen(self.coeffs)
        if c.shape != (self.mesh.n_nodes,):
            raise ValueError(f"expected {self.mesh.n_nodes} coefficients, got shape {c.shape}")
        object.__setattr__(self, "coeffs", c)

    def __call__(self, y):
        return evaluate(self, y)


def interpolate(f: Callable, mesh: Mesh1D) -> P1Function:
    """Nodal (Lagrange) interpolant of ``f``."""
    vals = np.asarray(f(mesh.nodes), dtype=float) * np.ones(mesh.n_nodes)
    if not np.all(np.isfinite(vals)):
        bad = int(np.flatnonzero(~np.isfinite(vals))[0])
        raise ValueError(f"non-finite value at node {bad} (y={mesh.nodes[bad]!r})")
    return P1Function(mesh, vals)


def evaluate(g: P1Function, y):
    """Point values of ``g``; ``y`` may be a scalar or an array inside [0, 1]."""
    ya = np.asarray(y, dtype=float)
    if np.any(ya < 0.0) or np.any(ya > 1.0) or not np.all(np.isfinite(ya)):
        raise ValueError("evaluation point outside [0, 1]")
    nodes, c = g.mesh.nodes, g.coeffs
    i = np.clip(np.searchsorted(nodes, ya, side="right") - 1, 0, nodes.size - 2)
    t = (ya - nodes[i]) / (nodes[i + 1] - nodes[i])
    out = (1.0 - t) * c[i] + t * c[i + 1]
    # nodes reproduce coefficients exactly, without rounding from the blend
    exact = nodes[i] == ya
    out = np.where(exact, c[i], out)
    out = np.where(nodes[i + 1] == ya, c[i + 1], out)
    return float(out) if np.ndim(y) == 0 else out


def _l2_sq_piecewise_linear(k: np.ndarray, ea: np.ndarray, eb: np.ndarray) -> float:
    # exact integral of a linear function squared over each element
    return float(np.sum(k * (ea * ea + ea * eb + eb * eb)) / 3.0)


def l2_norm(g: P1Function) -> float:
    c = g.coeffs
    return math.sqrt(_l2_sq_piecewise_linear(g.mesh.element_sizes, c[:-1], c[1:]))


def h1_seminorm(g: P1Function) -> float:
    d = np.diff(g.coeffs)
    return math.sqrt(float(np.sum(d * d / g.mesh.element_sizes)))


class CrossMeshNorm:
    """Exact L2 / H1-seminorm distances between P1 functions on two fixed meshes.

    The difference of two P1 functions is piecewise linear on the union of both
    node sets, so integrating it element by element on the merged mesh is exact.
    The merge and the interpolation weights are computed once, which makes
    repeated evaluation (one per time step in a convergence study) cheap.
    """

    def __init__(self, mesh_a: Mesh1D, mesh_b: Mesh1D):
        self.mesh_a, self.mesh_b = mesh_a, mesh_b
        z = np.union1d(mesh_a.nodes, mesh_b.nodes)
        self.k = np.diff(z)
        self._ia, self._ta = self._weights(mesh_a.nodes, z)
        self._ib, self._tb = self._weights(mesh_b.nodes, z)

    @staticmethod
    def _weights(nodes, z):
        i = np.clip(np.searchsorted(nodes, z, side="right") - 1, 0, nodes.size - 2)
        t = (z - nodes[i]) / (nodes[i + 1] - nodes[i])
        return i, t

    def difference(self, ca: np.ndarray, cb: np.ndarray) -> np.ndarray:
        """Nodal values of ``a - b`` on the merged mesh."""
        ia, ta, ib, tb = self._ia, self._ta, self._ib, self._tb
        va = ca[ia] + ta * (ca[ia + 1] - ca[ia])
        vb = cb[ib] + tb * (cb[ib + 1] - cb[ib])
        return va - vb

    def l2(self, ca: np.ndarray, cb: np.ndarray) -> float:
        e = self.difference(ca, cb)
        return math.sqrt(max(_l2_sq_piecewise_linear(self.k, e[:-1], e[1:]), 0.0))

    def h1_semi(self, ca: np.ndarray, cb: np.ndarray) -> float:
        d = np.diff(self.difference(ca, cb))
        return math.sqrt(float(np.sum(d * d / self.k)))


def l2_diff(g1: P1Function, g2: P1Function) -> float:
    return CrossMeshNorm(g1.mesh, g2.mesh).l2(g1.coeffs, g2.coeffs)


def h1_semi_diff(g1: P1Function, g2: P1Function) -> float:
    return CrossMeshNorm(g1.mesh, g2.mesh).h1_semi(g1.coeffs, g2.coeffs)
