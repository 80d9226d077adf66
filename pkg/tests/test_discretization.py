import numpy as np
import pytest
import scipy.io
from hypothesis import given, settings
from hypothesis import strategies as st
from conftest import cavity_op

from symstokes.discretization import (
    BoundaryData,
    StokesOperator,
    assemble_dense,
    assemble_rhs,
    check_diagonal,
    write_matrix_market,
)
from symstokes.domain import CellGrid, CellLabel, DIRICHLET_VALUE, classify_dofs
from symstokes.scenarios import cavity
from symstokes.verify import symmetry_defect

D, I, E = CellLabel.DIRICHLET, CellLabel.INTERIOR, CellLabel.EXTERIOR


def dense_distributive(L, nv, eta):
    """``M = [[I, -B^T], [0, eta B B^T]]`` built from the dense operator."""
    B = L[nv:, :nv]
    n = L.shape[0]
    M = np.zeros((n, n))
    M[:nv, :nv] = np.eye(nv)
    M[:nv, nv:] = -B.T
    M[nv:, nv:] = eta * B @ B.T
    return M


def test_zero_maps_to_zero():
    op, _ = cavity_op((5, 4))
    np.testing.assert_array_equal(op.apply(np.zeros(op.n)), np.zeros(op.n))


def test_length_mismatch():
    op, _ = cavity_op((4, 4))
    with pytest.raises(ValueError):
        op.apply(np.zeros(op.n + 1))


def test_negative_gamma_rejected():
    grid, _ = cavity((4, 4))
    with pytest.raises(ValueError):
        StokesOperator(grid, None, 1e-3, -1.0)


@pytest.mark.parametrize("gamma", [0.0, 1e-3])
def test_dense_16_cavity_symmetric(gamma):
    op, _ = cavity_op((16, 16), gamma=gamma)
    A = assemble_dense(op)
    assert symmetry_defect(A) < 1e-12


def test_dense_3d_symmetric():
    op, _ = cavity_op((4, 3, 5))
    assert symmetry_defect(assemble_dense(op)) < 1e-12


def test_hand_assembled_two_by_two_cavity():
    h, eta = 0.5, 2.0
    op, _ = cavity_op((2, 2), gamma=0.0, eta=eta, h=h)
    # order: u[2,1], u[2,2], v[1,2], v[2,2], p(1,1), p(1,2), p(2,1), p(2,2)
    a = eta / h**2
    g = 1.0 / h
    expected = np.zeros((8, 8))
    expected[:2, :2] = [[4 * a, -a], [-a, 4 * a]]
    expected[2:4, 2:4] = [[4 * a, -a], [-a, 4 * a]]
    B = np.array(
        [
            [-g, 0, -g, 0],
            [0, -g, g, 0],
            [g, 0, 0, -g],
            [0, g, 0, g],
        ]
    )
    expected[4:, :4] = B
    expected[:4, 4:] = B.T
    np.testing.assert_allclose(assemble_dense(op), expected, rtol=0, atol=1e-14)


def test_penalty_on_pressure_diagonal():
    op, _ = cavity_op((6, 6), gamma=1e-3)
    A = assemble_dense(op)
    nv = op.dofs.n_vel
    np.testing.assert_array_equal(np.diag(A)[nv:], -1e-3)
    np.testing.assert_array_equal(A[:nv, :nv], assemble_dense(op.with_gamma(0.0))[:nv, :nv])


def test_dense_cap():
    op, _ = cavity_op((8, 8))
    with pytest.raises(ValueError):
        assemble_dense(op, cap=10)


def test_constant_velocity_is_divergence_free_inside():
    # a closed box of Exterior cells lets every face of the patch be active
    labels = np.full((8, 8), I, dtype=np.int8)
    grid = CellGrid(labels, 0.1)
    op = StokesOperator(grid)
    x = np.zeros(op.n)
    x[: op.dofs.n_vel] = 1.7
    div = op.apply(x)[op.dofs.pressure_slice]
    np.testing.assert_allclose(div, 0.0, atol=1e-12)


@given(st.floats(-5, 5), st.floats(-5, 5), st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_linearity(alpha, beta, seed):
    op, _ = cavity_op((5, 6), gamma=1e-3)
    rng = np.random.default_rng(seed)
    x, y = rng.standard_normal((2, op.n))
    lhs = op.apply(alpha * x + beta * y)
    rhs = alpha * op.apply(x) + beta * op.apply(y)
    np.testing.assert_allclose(lhs, rhs, atol=1e-10 * (1 + np.abs(rhs).max()))


def test_distributive_column_velocity_is_unit():
    op, _ = cavity_op((6, 6))
    col = op.distributive_column(3).toarray().ravel()
    expected = np.zeros(op.n)
    expected[3] = 1.0
    np.testing.assert_array_equal(col, expected)
    with pytest.raises(IndexError):
        op.distributive_column(op.n)


def test_distributive_column_interior_pressure():
    op, _ = cavity_op((8, 8), gamma=0.0, eta=1.0, h=1.0)
    j = op.dofs.cell_index[4, 4]
    col = op.distributive_column(j).toarray().ravel()
    nv = op.dofs.n_vel
    vel = col[:nv][col[:nv] != 0]
    pres = col[nv:][col[nv:] != 0]
    assert sorted(np.abs(vel)) == [1.0] * 4
    assert sorted(pres) == [-1.0, -1.0, -1.0, -1.0, 4.0]
    assert col[j] == 4.0


def test_distributive_column_drops_legs_near_walls():
    op, _ = cavity_op((4, 4), gamma=0.0, eta=1.0, h=1.0)
    corner = op.dofs.cell_index[1, 1]
    col = op.distributive_column(corner).toarray().ravel()
    nv = op.dofs.n_vel
    assert np.count_nonzero(col[:nv]) == 2
    assert np.count_nonzero(col[nv:]) == 3
    assert col[corner] == 2.0


@pytest.mark.parametrize("gamma", [0.0, 1e-3])
def test_distributive_diagonal_matches_dense(gamma):
    eta = 1e-3
    op, _ = cavity_op((8, 8), gamma=gamma, eta=eta)
    L = assemble_dense(op)
    M = dense_distributive(L, op.dofs.n_vel, eta)
    np.testing.assert_allclose(op.distributive_diagonal(), np.diag(L @ M), rtol=1e-12, atol=1e-12)


def test_distributive_diagonal_interior_velocity():
    eta, h = 1e-3, 1 / 8
    op, _ = cavity_op((8, 8), eta=eta, h=h)
    d = op.distributive_diagonal()
    j = op.dofs.face_index[0][4, 4]
    assert d[j] == pytest.approx(4 * eta / h**2, rel=1e-14)
    d0 = op.with_gamma(0.0).distributive_diagonal()
    nv = op.dofs.n_vel
    np.testing.assert_array_equal(d[:nv], d0[:nv])


def test_distributive_matrix_blocks():
    op, _ = cavity_op((5, 5))
    M = op.distributive_matrix.toarray()
    nv = op.dofs.n_vel
    np.testing.assert_array_equal(M[nv:, :nv], 0.0)
    np.testing.assert_array_equal(M[:nv, :nv], np.eye(nv))


def test_zero_diagonal_detected():
    with pytest.raises(ValueError, match="zero distributive diagonal"):
        check_diagonal(np.array([1.0, 0.0, 2.0]), [0, 1])
    check_diagonal(np.array([1.0, 0.0, 2.0]), [0, 2])


def test_zero_boundary_gives_zero_rhs():
    grid, _ = cavity((5, 7))
    dofs = classify_dofs(grid)
    np.testing.assert_array_equal(assemble_rhs(grid, dofs, BoundaryData.zeros(grid)), 0.0)


def test_lid_rhs_four_by_four():
    eta, h = 1e-3, 0.25
    grid, bc = cavity((4, 4), h, ubar=1.0)
    dofs = classify_dofs(grid)
    b = assemble_rhs(grid, dofs, bc, eta)
    u_index = dofs.face_index[0]
    top_row = u_index[:, 4]  # u faces of the highest interior row
    expected = np.zeros(dofs.n)
    expected[top_row[top_row >= 0]] = eta * 1.0 / h**2
    np.testing.assert_allclose(b, expected, rtol=1e-15)
    # the lid is tangential: no flux enters the top cells
    np.testing.assert_array_equal(b[dofs.pressure_slice], 0.0)


def test_rhs_compatibility_closed_box():
    grid, _ = cavity((6, 5), 0.2)
    dofs = classify_dofs(grid)
    bc = BoundaryData.zeros(grid)
    rng = np.random.default_rng(3)
    for g, status in zip(bc.dirichlet, dofs.face_status):
        g[status == DIRICHLET_VALUE] = rng.standard_normal(int((status == DIRICHLET_VALUE).sum()))
    b = assemble_rhs(grid, dofs, bc)
    # influx summed face by face over the walls of the interior box
    influx = bc.dirichlet[0][1, 1:-1].sum() - bc.dirichlet[0][-2, 1:-1].sum()
    influx += bc.dirichlet[1][1:-1, 1].sum() - bc.dirichlet[1][1:-1, -2].sum()
    assert b[dofs.pressure_slice].sum() == pytest.approx(-influx / grid.h, rel=1e-12)


def test_rhs_rejects_value_on_active_face():
    grid, _ = cavity((4, 4))
    dofs = classify_dofs(grid)
    bc = BoundaryData.zeros(grid)
    bc.dirichlet[1][2, 2] = 1.0
    with pytest.raises(ValueError, match="non-Dirichlet face"):
        assemble_rhs(grid, dofs, bc)


def test_rhs_body_force():
    grid, _ = cavity((3, 3))
    dofs = classify_dofs(grid)
    bc = BoundaryData.zeros(grid)
    bc.force = tuple(np.ones(s.shape) for s in dofs.face_status)
    b = assemble_rhs(grid, dofs, bc)
    np.testing.assert_array_equal(b[: dofs.n_vel], 1.0)


def test_matrix_market_export(tmp_path):
    op, _ = cavity_op((4, 4))
    path = tmp_path / "L.mtx"
    write_matrix_market(path, op.matrix, "test")
    back = scipy.io.mmread(str(path)).toarray()
    np.testing.assert_array_equal(back, op.matrix.toarray())
