import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symstokes.discretization import StokesOperator, assemble_dense, assemble_rhs
from symstokes.domain import classify_dofs
from symstokes.history import ResidualHistory
from symstokes.krylov import sqmr_solve
from symstokes.multigrid import MgHierarchy
from symstokes.scenarios import cavity


def random_indefinite(rng, n):
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    eig = rng.uniform(0.5, 2.0, n) * rng.choice([-1.0, 1.0], n)
    eig[0], eig[1] = abs(eig[0]), -abs(eig[1])
    return Q @ np.diag(eig) @ Q.T


def test_zero_rhs():
    result = sqmr_solve(np.eye(4), np.zeros(4))
    assert result.converged and result.history.n_iterations == 0
    np.testing.assert_array_equal(result.x, 0.0)


def test_argument_checks():
    with pytest.raises(ValueError):
        sqmr_solve(np.eye(2), np.ones(2), tol=0.0)
    with pytest.raises(ValueError):
        sqmr_solve(np.eye(2), np.array([1.0, np.nan]))


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=20, deadline=None)
def test_random_symmetric_indefinite(seed):
    rng = np.random.default_rng(seed)
    A = random_indefinite(rng, 30)
    b = rng.standard_normal(30)
    result = sqmr_solve(A, b, tol=1e-10, maxit=200)
    assert result.converged
    x = np.linalg.solve(A, b)
    assert np.linalg.norm(result.x - x) <= 1e-8 * np.linalg.norm(x)


@pytest.mark.parametrize("n", [10, 30, 50])
def test_spd_converges_within_n(rng, n):
    G = rng.standard_normal((n, n))
    A = G @ G.T + n * np.eye(n)
    result = sqmr_solve(A, rng.standard_normal(n), tol=1e-10, maxit=n)
    assert result.converged
    assert result.history.n_iterations <= n


def test_symmetric_preconditioner_accepted(rng):
    A = random_indefinite(rng, 25)
    P = np.linalg.inv(A + 0.3 * np.diag(rng.standard_normal(25)))
    P = 0.5 * (P + P.T)
    b = rng.standard_normal(25)
    result = sqmr_solve(A, b, P, tol=1e-10)
    assert result.converged
    assert result.history.n_iterations < sqmr_solve(A, b, tol=1e-10).history.n_iterations


def test_breakdown_is_reported():
    result = sqmr_solve(np.zeros((3, 3)), np.ones(3))
    assert result.status == "breakdown"


def test_max_iterations_status(rng):
    A = random_indefinite(rng, 40)
    result = sqmr_solve(A, rng.standard_normal(40), tol=1e-14, maxit=3)
    assert result.status == "max-iterations"
    assert result.history.n_iterations == 3


def test_history_holds_true_residuals(rng):
    A = random_indefinite(rng, 20)
    b = rng.standard_normal(20)
    full = sqmr_solve(A, b, tol=1e-12)
    for k in range(1, 6):
        partial = sqmr_solve(A, b, tol=1e-300, maxit=k)
        rel = np.linalg.norm(b - A @ partial.x) / np.linalg.norm(b)
        assert partial.history.residuals[-1] == rel
        assert full.history.residuals[k] == rel


def test_operator_objects_accepted():
    op = StokesOperator(cavity((4, 4))[0], None, 1e-3, 1e-3)
    b = np.ones(op.n)
    a = sqmr_solve(op, b, tol=1e-10)
    c = sqmr_solve(op.matrix, b, tol=1e-10)
    np.testing.assert_array_equal(a.x, c.x)


def test_mg_sqmr_matches_dense_solve_up_to_constant_pressure():
    grid, bc = cavity((8, 8))
    dofs = classify_dofs(grid)
    L = StokesOperator(grid, dofs, 1e-3, 0.0)
    b = assemble_rhs(grid, dofs, bc)
    hier = MgHierarchy(grid, levels=2)
    result = sqmr_solve(L.matrix, b, hier.as_preconditioner(), tol=1e-10)
    assert result.converged
    x = np.linalg.lstsq(assemble_dense(L), b, rcond=None)[0]
    nv = dofs.n_vel
    np.testing.assert_allclose(result.x[:nv], x[:nv], rtol=0, atol=1e-8 * np.abs(x[:nv]).max())
    dp = result.x[nv:] - x[nv:]
    assert np.ptp(dp) < 1e-7 * np.abs(x[nv:]).max()


def test_history_csv(tmp_path):
    h = ResidualHistory()
    h.record(0, 1.0)
    h.record(1, 0.25)
    with pytest.raises(ValueError):
        h.record(1, 0.1)
    h.write_csv(tmp_path / "h.csv")
    lines = (tmp_path / "h.csv").read_text().splitlines()
    assert lines[0] == "iteration,rel_residual,seconds"
    assert [ln.split(",")[:2] for ln in lines[1:]] == [["0", "1.0"], ["1", "0.25"]]
