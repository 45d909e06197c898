import numpy as np
import pytest

from mlbicgstabt import CSRMatrix, LeftLanczosBasis, ShadowSpec, build_shadow, left_lanczos_vector
from mlbicgstabt.shadow import ZeroInitialResidual, rademacher_columns


def test_single_column_is_r0():
    r0 = np.array([1.0, -2, 3])
    Q = build_shadow(r0, ShadowSpec(1))
    assert Q.shape == (3, 1) and np.array_equal(Q[:, 0], r0)


def test_deterministic_and_signs():
    r0 = np.linspace(1, 2, 50)
    Q1 = build_shadow(r0, ShadowSpec(4, seed=7))
    Q2 = build_shadow(r0, ShadowSpec(4, seed=7))
    assert np.array_equal(Q1, Q2)
    assert set(np.unique(Q1[:, 1:].real)) <= {-1.0, 1.0}
    assert np.all(Q1[:, 1:].imag == 0)
    assert not np.array_equal(Q1, build_shadow(r0, ShadowSpec(4, seed=8)))


def test_rademacher_matches_sign_of_generator():
    z = np.random.Generator(np.random.PCG64(3)).standard_normal((2, 5))
    assert np.array_equal(rademacher_columns(5, 2, 3), np.sign(z).T)


def test_zero_residual_is_distinct_error():
    with pytest.raises(ZeroInitialResidual):
        build_shadow(np.zeros(4), ShadowSpec(2))


def test_provided_columns():
    C = np.arange(12.0).reshape(4, 3)
    Q = build_shadow(np.ones(4), ShadowSpec(2, mode="provided", columns=C))
    assert np.array_equal(Q, C[:, :2])
    with pytest.raises(ValueError):
        build_shadow(np.ones(5), ShadowSpec(2, mode="provided", columns=C))
    with pytest.raises(ValueError):
        ShadowSpec(2, mode="provided")
    with pytest.raises(ValueError):
        ShadowSpec(0)


def test_left_lanczos_examples():
    D = np.array([[1.0, 2j], [0, 3]])
    A = CSRMatrix.from_dense(D)
    Q = np.array([[1, 0], [0, 1]], dtype=complex)
    AH = D.conj().T
    assert np.allclose(left_lanczos_vector(A, Q, 1), Q[:, 0])
    assert np.allclose(left_lanczos_vector(A, Q, 2), Q[:, 1])
    assert np.allclose(left_lanczos_vector(A, Q, 3), AH @ Q[:, 0])
    assert np.allclose(left_lanczos_vector(A, Q, 6), AH @ AH @ Q[:, 1])


def test_basis_out_of_order_and_counts():
    rng = np.random.default_rng(0)
    D = rng.standard_normal((6, 6))
    A = CSRMatrix.from_dense(D)
    Q = rng.standard_normal((6, 3)) + 0j
    P = LeftLanczosBasis(A, Q)
    forward = [P[k].copy() for k in range(1, 10)]
    assert np.allclose(P[4], D.T @ Q[:, 0])  # recompute after going past
    assert all(np.allclose(forward[k - 1], left_lanczos_vector(A, Q, k)) for k in range(1, 10))
    with pytest.raises(IndexError):
        P[0]


@pytest.mark.parametrize("n", [1, 2, 3])
def test_span_is_block_krylov(n):
    # first k vectors span the first k columns of [Q, A^H Q, (A^H)^2 Q, ...]
    rng = np.random.default_rng(n)
    N = 12
    D = rng.standard_normal((N, N))
    A = CSRMatrix.from_dense(D)
    Q = rng.standard_normal((N, n)) + 0j
    blocks = np.hstack([np.linalg.matrix_power(D.T, j) @ Q for j in range(4)])
    P = LeftLanczosBasis(A, Q)
    for k in range(1, 4 * n + 1):
        Pk = np.column_stack([P[t].copy() for t in range(1, k + 1)])
        assert np.allclose(Pk, blocks[:, :k])
