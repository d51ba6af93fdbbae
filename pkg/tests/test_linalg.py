import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rubberfem.linalg import (TridiagonalMatrix, TridiagonalSystem, ZeroPivot, matvec,
                              residual_inf, thomas_solve)

from oracles import diagonally_dominant


def dominant(rng, n):
    return TridiagonalMatrix(*diagonally_dominant(rng, n))


def test_identity():
    eye = TridiagonalMatrix(np.zeros(3), np.ones(4), np.zeros(3))
    r = np.array([1.0, -2.0, 3.0, 0.5])
    np.testing.assert_array_equal(thomas_solve(TridiagonalSystem(eye, r)), r)
    np.testing.assert_array_equal(matvec(eye, r), r)


def test_two_by_two():
    a = TridiagonalMatrix(np.array([-1.0]), np.array([2.0, 2.0]), np.array([-1.0]))
    np.testing.assert_allclose(thomas_solve(TridiagonalSystem(a, np.ones(2))), [1.0, 1.0], rtol=1e-15)


def test_stiffness_row_sums():
    s = TridiagonalMatrix(np.array([-2.0, -2.0]), np.array([2.0, 4.0, 2.0]), np.array([-2.0, -2.0]))
    np.testing.assert_array_equal(matvec(s, np.ones(3)), 0.0)


@pytest.mark.parametrize("n", [1, 2, 3, 50, 200])
def test_against_dense_solver(n):
    rng = np.random.default_rng(n)
    a = dominant(rng, n) if n > 1 else TridiagonalMatrix(np.zeros(0), np.array([3.0]), np.zeros(0))
    r = rng.normal(size=n)
    x = thomas_solve(TridiagonalSystem(a, r))
    ref = np.linalg.solve(a.to_dense(), r)
    assert np.max(np.abs(x - ref)) <= 1e-10 * np.max(np.abs(ref))
    assert residual_inf(TridiagonalSystem(a, r), x) <= 1e-10 * max(1.0, np.max(np.abs(r)))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2 ** 31), n=st.integers(2, 200),
       alpha=st.floats(-10, 10), beta=st.floats(-10, 10))
def test_linearity(seed, n, alpha, beta):
    rng = np.random.default_rng(seed)
    a = dominant(rng, n)
    r1, r2 = rng.normal(size=n), rng.normal(size=n)
    lhs = thomas_solve(TridiagonalSystem(a, alpha * r1 + beta * r2))
    rhs = alpha * thomas_solve(TridiagonalSystem(a, r1)) + beta * thomas_solve(TridiagonalSystem(a, r2))
    np.testing.assert_allclose(lhs, rhs, rtol=0, atol=1e-10 * max(1.0, np.max(np.abs(rhs))))


def test_zero_pivot():
    a = TridiagonalMatrix(np.array([1.0]), np.array([1.0, 1.0]), np.array([1.0]))
    with pytest.raises(ZeroPivot) as info:
        thomas_solve(TridiagonalSystem(a, np.ones(2)))
    assert info.value.index == 1


def test_inconsistent_shapes():
    with pytest.raises(ValueError):
        TridiagonalMatrix(np.zeros(2), np.ones(2), np.zeros(1))
    with pytest.raises(ValueError):
        TridiagonalMatrix(np.zeros(1), np.array([1.0, np.nan]), np.zeros(1))
    a = TridiagonalMatrix(np.zeros(1), np.ones(2), np.zeros(1))
    with pytest.raises(ValueError):
        TridiagonalSystem(a, np.ones(3))


def test_matrix_algebra():
    rng = np.random.default_rng(0)
    a, b = dominant(rng, 6), dominant(rng, 6)
    np.testing.assert_allclose((a + b.scaled(2.0)).to_dense(), a.to_dense() + 2.0 * b.to_dense())
    np.testing.assert_allclose(a.row_sums(), a.to_dense().sum(axis=1))
