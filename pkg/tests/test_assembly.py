import numpy as np
import pytest

from rubberfem.assembly import assemble, boundary_load
from rubberfem.mesh import Mesh1D, uniform_mesh

from oracles import midpoint_matrices


def test_three_node_mass_and_stiffness():
    mats = assemble(uniform_mesh(3))
    np.testing.assert_allclose(mats.mass.diag, [1 / 6, 1 / 3, 1 / 6], rtol=1e-14)
    np.testing.assert_allclose(mats.mass.lower, [1 / 12, 1 / 12], rtol=1e-14)
    np.testing.assert_allclose(mats.mass.upper, [1 / 12, 1 / 12], rtol=1e-14)
    np.testing.assert_allclose(mats.stiffness.diag, [2, 4, 2], rtol=1e-14)
    np.testing.assert_allclose(mats.stiffness.upper, [-2, -2], rtol=1e-14)


def test_single_element_convection():
    c = assemble(uniform_mesh(2)).convection.to_dense()
    np.testing.assert_allclose(c, [[-1 / 6, 1 / 6], [-1 / 3, 1 / 3]], rtol=1e-14)


@pytest.mark.parametrize("seed", range(6))
def test_against_midpoint_quadrature(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 9))
    nodes = np.concatenate(([0.0], np.sort(rng.uniform(0.05, 0.95, n - 2)), [1.0]))
    mats = assemble(Mesh1D(nodes))
    mass, stiff, conv = midpoint_matrices(nodes)
    np.testing.assert_allclose(mats.mass.to_dense(), mass, atol=1e-6)
    np.testing.assert_allclose(mats.stiffness.to_dense(), stiff, atol=1e-6)
    np.testing.assert_allclose(mats.convection.to_dense(), conv, atol=1e-6)


@pytest.mark.parametrize("n", [2, 3, 20, 321])
def test_structural_identities(n):
    rng = np.random.default_rng(n)
    nodes = np.concatenate(([0.0], np.sort(rng.uniform(0.0, 1.0, n - 2)), [1.0]))
    mats = assemble(Mesh1D(np.unique(nodes)) if len(np.unique(nodes)) == n else uniform_mesh(n))
    assert np.max(np.abs(mats.stiffness.row_sums())) <= 1e-13 * max(1.0, np.max(mats.stiffness.diag))
    assert np.max(np.abs(mats.convection.row_sums())) <= 1e-13
    assert mats.mass.to_dense().sum() == pytest.approx(1.0, abs=1e-13)
    for m in (mats.mass, mats.stiffness):
        np.testing.assert_array_equal(m.lower, m.upper)
    assert np.all(mats.mass.diag > 0)
    assert mats.n == n


def test_boundary_load_examples():
    np.testing.assert_array_equal(boundary_load(0.0, 3.0, 1.0, 1.0, 1.0, 0.0, 1.0, 4), np.zeros(4))
    assert boundary_load(1.0, 10.0, 2.5, 4.0, 1.0, 0.0, 0.0, 3)[0] == 0.0
    np.testing.assert_allclose(boundary_load(2.0, 3.0, 1.0, 1.0, 2.0, 0.5, 1.0, 4),
                               [2.0, 0.0, 0.0, -0.25], rtol=1e-15)
    with pytest.raises(ValueError):
        boundary_load(1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 1.0, 3)
