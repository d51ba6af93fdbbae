"""Tridiagonal matrices and the Thomas algorithm."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

PIVOT_TOL = 1e-14


class ZeroPivot(ArithmeticError):
    """Forward elimination met a (numerically) vanishing pivot."""

    def __init__(self, index: int):
        super().__init__(f"zero pivot at row {index}")
        self.index = index


def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class TridiagonalMatrix:
    """Row i holds ``lower[i-1], diag[i], upper[i]``."""

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo, di, up = (_readonly(a) for a in (self.lower, self.diag, self.upper))
        n = di.size
        if di.ndim != 1 or n < 1 or lo.shape != (n - 1,) or up.shape != (n - 1,):
            raise ValueError(f"inconsistent band lengths {lo.shape}, {di.shape}, {up.shape}")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(di)) and np.all(np.isfinite(up))):
            raise ValueError("tridiagonal entries must be finite")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "diag", di)
        object.__setattr__(self, "upper", up)

    @property
    def n(self) -> int:
        return self.diag.size

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.lower, -1) + np.diag(self.upper, 1)

    def scaled(self, a: float) -> "TridiagonalMatrix":
        return TridiagonalMatrix(a * self.lower, a * self.diag, a * self.upper)

    def __add__(self, other: "TridiagonalMatrix") -> "TridiagonalMatrix":
        return TridiagonalMatrix(self.lower + other.lower, self.diag + other.diag,
                                 self.upper + other.upper)

    def row_sums(self) -> np.ndarray:
        s = self.diag.copy()
        s[:-1] += self.upper
        s[1:] += self.lower
        return s


@dataclass(frozen=True, eq=False)
class TridiagonalSystem:
    matrix: TridiagonalMatrix
    rhs: np.ndarray

    def __post_init__(self):
        r = _readonly(self.rhs)
        if r.shape != (self.matrix.n,):
            raise ValueError(f"rhs shape {r.shape} does not match dimension {self.matrix.n}")
        object.__setattr__(self, "rhs", r)


@njit(cache=True)
def _thomas(lower, diag, upper, rhs, x, cp, dp, tol):
    """Solve into ``x``; returns -1 on success or the index of the failing pivot."""
    n = diag.size
    scale = abs(diag[0])
    if n > 1:
        scale = max(scale, abs(upper[0]))
    piv = diag[0]
    if abs(piv) <= tol * scale or scale == 0.0:
        return 0
    if n > 1:
        cp[0] = upper[0] / piv
    dp[0] = rhs[0] / piv
    for i in range(1, n):
        piv = diag[i] - lower[i - 1] * cp[i - 1]
        scale = max(abs(diag[i]), abs(lower[i - 1]))
        if i < n - 1:
            scale = max(scale, abs(upper[i]))
        if abs(piv) <= tol * scale or scale == 0.0:
            return i
        if i < n - 1:
            cp[i] = upper[i] / piv
        dp[i] = (rhs[i] - lower[i - 1] * dp[i - 1]) / piv
    x[n - 1] = dp[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return -1


def solve_bands(lower: np.ndarray, diag: np.ndarray, upper: np.ndarray,
                rhs: np.ndarray) -> np.ndarray:
    """Thomas solve on raw band arrays (no copies of the inputs are modified)."""
    n = diag.size
    x = np.empty(n)
    work = np.empty((2, n))
    status = _thomas(lower, diag, upper, rhs, x, work[0], work[1], PIVOT_TOL)
    if status >= 0:
        raise ZeroPivot(int(status))
    return x


def thomas_solve(sys: TridiagonalSystem) -> np.ndarray:
    """O(n) elimination without pivoting.

    Raises :class:`ZeroPivot` when a pivot falls below ``1e-14`` times the
    magnitude of its row.
    """
    m = sys.matrix
    return solve_bands(m.lower, m.diag, m.upper, sys.rhs)


def matvec(m: TridiagonalMatrix, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (m.n,):
        raise ValueError(f"vector shape {x.shape} does not match dimension {m.n}")
    y = m.diag * x
    y[:-1] += m.upper * x[1:]
    y[1:] += m.lower * x[:-1]
    return y


def residual_inf(sys: TridiagonalSystem, x: np.ndarray) -> float:
    return float(np.max(np.abs(matvec(sys.matrix, x) - sys.rhs)))
