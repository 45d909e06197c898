import numpy as np
import pytest
import scipy.linalg as sla

from mlbicgstabt import (CSRMatrix, FactorizationBreakdown, Identity, Jacobi, OpCounters,
                         apply_inv, apply_inv_adjoint, ilut_factorize, parse_precond)
from conftest import rel


def dense_system(seed, N=8, cplx=True):
    rng = np.random.default_rng(seed)
    D = rng.standard_normal((N, N)) + (1j * rng.standard_normal((N, N)) if cplx else 0)
    return D, CSRMatrix.from_dense(D)


@pytest.mark.parametrize("seed", range(10))
def test_droptol_zero_is_exact_lu(seed):
    D, A = dense_system(seed)
    M = ilut_factorize(A, droptol=0.0)
    L, U, P = M.L.to_dense(), M.U.to_dense(), M.P.to_dense()
    assert np.linalg.norm(P @ D - L @ U) / np.linalg.norm(D) < 1e-12
    assert np.allclose(np.diag(L), 1)
    assert np.allclose(np.triu(L, 1), 0) and np.allclose(np.tril(U, -1), 0)


@pytest.mark.parametrize("seed", range(5))
def test_real_pivoting_matches_lapack(seed):
    # for real data the largest-modulus rule coincides with getrf's
    D, A = dense_system(seed, cplx=False)
    M = ilut_factorize(A, droptol=0.0)
    Ps, Ls, Us = sla.lu(D)
    assert np.array_equal(M.perm, np.argmax(Ps, axis=0))
    assert rel(M.U.to_dense(), Us) < 1e-10 and rel(M.L.to_dense(), Ls) < 1e-10


def test_huge_droptol_gives_diagonal_u():
    D, A = dense_system(3, cplx=False)
    D = D + 10 * np.eye(8)
    M = ilut_factorize(CSRMatrix.from_dense(D), droptol=1e6, pivot=False)
    assert np.allclose(np.triu(M.U.to_dense(), 1), 0)
    assert np.allclose(M.L.to_dense(), np.eye(8))
    assert np.allclose(np.diag(M.U.to_dense()), np.diag(D))


def test_drop_rules_differ_by_norm():
    # column 0 has a big entry in row 2, so the column rule drops (1, 0)
    # while row 1 is tiny, so the row rule keeps it
    D = np.array([[4.0, 0, 0], [0.05, 0.1, 0], [10.0, 0, 3]])
    A = CSRMatrix.from_dense(D)
    col = ilut_factorize(A, 0.01, pivot=False, rule="column")
    row = ilut_factorize(A, 0.01, pivot=False, rule="row")
    assert col.L.to_dense()[1, 0] == 0
    assert row.L.to_dense()[1, 0] == pytest.approx(0.05 / 4)
    assert col.rule == "column" and row.rule == "row"
    with pytest.raises(ValueError):
        ilut_factorize(A, 0.01, rule="diagonal")


@pytest.mark.parametrize("rule", ["column", "row"])
def test_exact_at_zero_droptol(rule):
    D, A = dense_system(7)
    M = ilut_factorize(A, 0.0, rule=rule)
    assert np.linalg.norm(M.P.to_dense() @ D - M.L.to_dense() @ M.U.to_dense()) < 1e-12 * (
        np.linalg.norm(D))


def test_diagonal_matrix():
    d = np.array([2.0, -1, 4, 0.5])
    M = ilut_factorize(CSRMatrix.diag(d))
    assert np.allclose(M.L.to_dense(), np.eye(4))
    assert np.allclose(M.U.to_dense(), np.diag(d))


def test_dropping_reduces_fill():
    rng = np.random.default_rng(0)
    N = 40
    D = np.where(rng.random((N, N)) < 0.1, rng.standard_normal((N, N)), 0) + 5 * np.eye(N)
    A = CSRMatrix.from_dense(D)
    exact, loose = ilut_factorize(A, 0.0), ilut_factorize(A, 1e-1)
    assert loose.L.nnz + loose.U.nnz < exact.L.nnz + exact.U.nnz


@pytest.mark.parametrize("seed", range(5))
def test_solve_and_adjoint_solve(seed):
    D, A = dense_system(seed, N=10)
    M = ilut_factorize(A, 0.0)
    v = np.random.default_rng(seed).standard_normal(10) + 0j
    assert rel(M.solve(v), np.linalg.solve(D, v)) < 1e-10
    assert rel(M.solve_adjoint(v), np.linalg.solve(D.conj().T, v)) < 1e-10


def test_inexact_adjoint_identity():
    rng = np.random.default_rng(1)
    N = 30
    D = np.where(rng.random((N, N)) < 0.2, rng.standard_normal((N, N)), 0) + 4 * np.eye(N)
    M = ilut_factorize(CSRMatrix.from_dense(D), 1e-1)
    x, y = rng.standard_normal(N) + 0j, rng.standard_normal(N) + 1j * rng.standard_normal(N)
    # <y, M^{-1} x> = <M^{-H} y, x>
    assert abs(np.vdot(y, M.solve(x)) - np.vdot(M.solve_adjoint(y), x)) < 1e-10


@pytest.mark.parametrize("D,col", [([[0.0, 1], [0, 1]], 0), ([[1.0, 1], [1, 1]], 1)])
def test_zero_pivot_raises(D, col):
    with pytest.raises(FactorizationBreakdown) as info:
        ilut_factorize(CSRMatrix.from_dense(np.array(D)), 0.0)
    assert info.value.index == col


def test_pivoting_rescues_zero_diagonal():
    A = CSRMatrix.from_dense(np.array([[0.0, 1], [1, 0]]))
    M = ilut_factorize(A, 0.0)
    assert np.allclose(M.solve(np.array([1, 2], complex)), [2, 1])
    with pytest.raises(FactorizationBreakdown):
        ilut_factorize(A, 0.0, pivot=False)


def test_jacobi_and_identity():
    A = CSRMatrix.from_dense(np.array([[2.0, 1], [0, 1j]]))
    J = Jacobi.from_matrix(A)
    assert np.allclose(J.solve(np.array([2, 1j])), [1, 1])
    assert np.allclose(J.solve_adjoint(np.array([2, 1j])), [1, -1])
    v = np.ones(2, complex)
    out = Identity(2).solve(v)
    out[0] = 5
    assert v[0] == 1
    with pytest.raises(FactorizationBreakdown):
        Jacobi([1.0, 0.0])


def test_counted_application():
    c = OpCounters()
    M = Identity(3)
    apply_inv(M, np.ones(3), c)
    apply_inv_adjoint(M, np.ones(3), c)
    assert c.precond_solves == 2


def test_parse_precond():
    A = CSRMatrix.from_dense(np.array([[4.0, 1], [1, 3]]))
    assert isinstance(parse_precond("none", A), Identity)
    assert isinstance(parse_precond("jacobi", A), Jacobi)
    M = parse_precond("ilut:1e-2", A)
    assert M.droptol == 1e-2 and M.rule == "row"
    assert parse_precond("ilut:1e-2:column", A).rule == "column"
    assert parse_precond("ilut", A).droptol == 1e-3
    for bad in ("ilut:abc", "ssor", "ilut:1e-2:diag", "ilut:1:row:x", "ilutx"):
        with pytest.raises(ValueError):
            parse_precond(bad, A)
