"""Brute-force reference computations shared by the unit and acceptance tests."""
import numpy as np


def hat(nodes, i, y):
    """Hat function i and its derivative at points y."""
    out = np.zeros_like(y)
    d = np.zeros_like(y)
    if i > 0:
        a, b = nodes[i - 1], nodes[i]
        m = (y >= a) & (y <= b)
        out[m] = (y[m] - a) / (b - a)
        d[m & (y < b)] = 1.0 / (b - a)
    if i < len(nodes) - 1:
        a, b = nodes[i], nodes[i + 1]
        m = (y >= a) & (y <= b)
        out[m] = (b - y[m]) / (b - a)
        d[m & (y >= a)] = -1.0 / (b - a)
    return out, d


def midpoint_matrices(nodes, n=10_000):
    """Mass, stiffness and convection by the composite midpoint rule, n points per element."""
    size = len(nodes)
    mass, stiff, conv = (np.zeros((size, size)) for _ in range(3))
    for e in range(size - 1):
        a, b = nodes[e], nodes[e + 1]
        h = (b - a) / n
        y = a + h * (np.arange(n) + 0.5)
        for i in (e, e + 1):
            pi, di = hat(nodes, i, y)
            for j in (e, e + 1):
                pj, dj = hat(nodes, j, y)
                mass[i, j] += h * np.sum(pi * pj)
                stiff[i, j] += h * np.sum(di * dj)
                conv[i, j] += h * np.sum(y * dj * pi)
    return mass, stiff, conv


def dense_step(nodes, u, w, d, dt, tau=0.0):
    """One time step from closed-form element matrices and a dense solve."""
    n = len(nodes)
    M, S, C = np.zeros((n, n)), np.zeros((n, n)), np.zeros((n, n))
    for e in range(n - 1):
        a, b = nodes[e], nodes[e + 1]
        k = b - a
        idx = np.ix_([e, e + 1], [e, e + 1])
        M[idx] += k / 6 * np.array([[2, 1], [1, 2]])
        S[idx] += np.array([[1, -1], [-1, 1]]) / k
        p, q = (2 * a + b) / 6, (a + 2 * b) / 6
        C[idx] += np.array([[-p, p], [-q, q]])
    dW = d.A0 * (u[-1] - (float(d.sigma_scaled(w)) if w >= 0 else 0.0))
    wn = w + dt * dW
    A = M / dt - dW / wn * C + S / wn ** 2
    rhs = M @ u / dt
    rhs[0] += d.Bi / wn * (float(d.b_scaled(tau)) - d.H * u[0])
    rhs[-1] -= dW / wn * u[-1]
    return np.linalg.solve(A, rhs), wn


def diagonally_dominant(rng, n):
    lower, upper = rng.uniform(-1, 1, n - 1), rng.uniform(-1, 1, n - 1)
    diag = rng.uniform(2.5, 4.0, n) * rng.choice([-1.0, 1.0], n)
    return lower, diag, upper
