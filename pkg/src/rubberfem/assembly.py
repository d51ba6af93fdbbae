"""P1 finite element matrices for the front-fixed diffusion problem.

With hat functions phi_i on a mesh of [0, 1]:

    mass        M_ij = (phi_j, phi_i)
    stiffness   S_ij = (phi_j', phi_i')
    convection  C_ij = (y phi_j', phi_i)

The convection integrand is cubic on each element, so two Gauss points per
element integrate all three matrices exactly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import TridiagonalMatrix
from .mesh import Mesh1D

_GAUSS = np.array([-1.0, 1.0]) / np.sqrt(3.0)


@dataclass(frozen=True, eq=False)
class ElementMatrices:
    mass: TridiagonalMatrix
    stiffness: TridiagonalMatrix
    convection: TridiagonalMatrix

    @property
    def n(self) -> int:
        return self.mass.n


def assemble(mesh: Mesh1D) -> ElementMatrices:
    y0, k = mesh.nodes[:-1], mesh.element_sizes
    n = mesh.n_nodes
    # local 2x2 blocks, indexed [row][col] with 0 = left node, 1 = right node
    m_loc = np.zeros((2, 2, n - 1))
    c_loc = np.zeros((2, 2, n - 1))
    dphi = (-1.0 / k, 1.0 / k)
    for xi in _GAUSS:
        t = 0.5 * (1.0 + xi)
        yg = y0 + t * k
        w = 0.5 * k
        phi = (1.0 - t, t)
        for r in range(2):
            for c in range(2):
                m_loc[r, c] += w * phi[r] * phi[c]
                c_loc[r, c] += w * yg * phi[r] * dphi[c]
    m_loc[1, 0] = m_loc[0, 1]  # exact symmetry, independent of rounding order
    s_loc = np.array([[1.0 / k, -1.0 / k], [-1.0 / k, 1.0 / k]])

    def scatter(loc):
        diag = np.zeros(n)
        diag[:-1] += loc[0, 0]
        diag[1:] += loc[1, 1]
        return TridiagonalMatrix(lower=loc[1, 0], diag=diag, upper=loc[0, 1])

    return ElementMatrices(mass=scatter(m_loc), stiffness=scatter(s_loc),
                           convection=scatter(c_loc))


def boundary_load(bi: float, b_over_m0: float, H: float, u_at_0: float, w_next: float,
                  dW: float, u_at_1: float, n_nodes: int) -> np.ndarray:
    """Endpoint terms of the discrete equation, moved to the right-hand side.

    Robin influx ``(Bi / W) (b/m0 - H U(0))`` enters row 0; the moving-interface
    term ``-(dW / W) U(1)`` enters the last row.
    """
    if not w_next > 0.0:
        raise ValueError(f"interface value must be positive, got {w_next!r}")
    load = np.zeros(n_nodes)
    load[0] += bi / w_next * (b_over_m0 - H * u_at_0)
    load[-1] -= dW / w_next * u_at_1
    return load
