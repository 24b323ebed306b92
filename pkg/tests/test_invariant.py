import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nearjordan.errors import InseparableClusterError, ReorderError, RepeatedEigenvalueError
from nearjordan.invariant import (
    ClusterSelection,
    SeparationWarning,
    as_square_matrix,
    block_diagonalize,
    cluster_eigenvalues,
    diagonalize_cluster,
    reorder_cluster,
    schur_decompose,
    separation_estimate,
    triple_from_schur,
)
from oracles import random_clustered_matrix, schur_indices_near


def test_cluster_selection_validation():
    assert ClusterSelection((2, 0)).d == 2
    with pytest.raises(ValueError):
        ClusterSelection(())
    with pytest.raises(ValueError):
        ClusterSelection((1, 1))
    with pytest.raises(ValueError):
        ClusterSelection((-1, 0))
    with pytest.raises(ValueError):
        ClusterSelection((0, 3)).check(3)
    with pytest.raises(ValueError):
        ClusterSelection((0, 1, 2, 3)).check(3)


def test_as_square_matrix_rejects_bad_input():
    with pytest.raises(ValueError):
        as_square_matrix(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        as_square_matrix(np.array([[np.nan]]))
    with pytest.raises(ValueError):
        as_square_matrix(np.zeros((0, 0)))


def test_schur_form():
    rng = np.random.default_rng(1)
    A = rng.standard_normal((6, 6))
    Q, T = schur_decompose(A)
    assert np.allclose(Q @ T @ Q.conj().T, A, atol=1e-12)
    assert np.allclose(Q.conj().T @ Q, np.eye(6), atol=1e-13)
    assert not np.any(np.tril(T, -1))


def test_reorder_moves_cluster_to_front_in_order():
    rng = np.random.default_rng(2)
    A = rng.standard_normal((7, 7)) + 1j * rng.standard_normal((7, 7))
    Q, T = schur_decompose(A)
    diag = np.diag(T)
    cluster = (5, 1, 3)
    Q2, T2 = reorder_cluster(Q, T, cluster)
    assert np.allclose(np.diag(T2)[:3], diag[list(cluster)], atol=1e-12)
    rest = [diag[i] for i in range(7) if i not in cluster]
    assert np.allclose(np.diag(T2)[3:], rest, atol=1e-12)
    assert np.allclose(Q2 @ T2 @ Q2.conj().T, A, atol=1e-12)
    assert not np.any(np.tril(T2, -1))
    # inputs untouched
    assert np.array_equal(np.diag(T), diag)


def test_reorder_refuses_to_split_equal_eigenvalues():
    T = np.array([[1.0, 1.0, 0.0], [0.0, 2.0, 1.0], [0.0, 0.0, 2.0]], dtype=complex)
    Q = np.eye(3, dtype=complex)
    with pytest.raises(ReorderError) as info:
        reorder_cluster(Q, T, (2,))
    assert info.value.pair == (2, 2)


def test_separation_estimate_diagonal_case():
    # for diagonal blocks sep is the smallest eigenvalue gap
    S = np.diag([1.0, 2.0])
    Sp = np.diag([2.5, 5.0])
    assert separation_estimate(S, Sp) == pytest.approx(0.5)
    assert separation_estimate(S, np.zeros((0, 0))) == np.inf


def test_separation_matches_kronecker_oracle():
    rng = np.random.default_rng(3)
    S = rng.standard_normal((3, 3))
    Sp = rng.standard_normal((2, 2)) + 4 * np.eye(2)
    # build the operator column by column from its action on unit matrices
    cols = []
    for j in range(2):
        for i in range(3):
            Z = np.zeros((3, 2))
            Z[i, j] = 1.0
            cols.append((S @ Z - Z @ Sp).ravel(order="F"))
    L = np.array(cols).T
    assert separation_estimate(S, Sp) == pytest.approx(np.linalg.svd(L, compute_uv=False)[-1])


def test_triple_identities_random():
    rng = np.random.default_rng(4)
    A, lam = random_clustered_matrix(rng, 8, 3)
    cluster = schur_indices_near(A, lam)
    t = block_diagonalize(A, cluster)
    r1, r2, r3 = t.residuals(A)
    scale = np.linalg.norm(A)
    assert max(r1, r2) <= 1e-12 * scale and r3 <= 1e-12
    assert np.allclose(np.sort_complex(np.linalg.eigvals(t.S)), np.sort_complex(lam), atol=1e-8)
    assert t.separation > 0.5


def test_full_cluster_uses_schur_vectors():
    rng = np.random.default_rng(5)
    A = rng.standard_normal((4, 4))
    t = block_diagonalize(A, (0, 1, 2, 3))
    assert np.allclose(t.X, t.Y)
    assert max(t.residuals(A)) <= 1e-12 * np.linalg.norm(A)
    assert t.separation == np.inf


def test_inseparable_cluster_raises():
    # the double eigenvalue 1 is split between cluster and complement
    A = np.array([[1.0, 1.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 5.0]])
    Q, T = schur_decompose(A)
    idx = [i for i, z in enumerate(np.diag(T)) if abs(z - 1) < 1e-6]
    with pytest.raises(InseparableClusterError):
        triple_from_schur(A, Q, T, (idx[0],))


def test_close_cluster_warns():
    A = np.diag([0.0, 1e-13, 3.0])
    with pytest.warns(SeparationWarning):
        block_diagonalize(A, (0,))


def test_well_separated_cluster_silent():
    A = np.diag([0.0, 1.0, 3.0])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        block_diagonalize(A, (0,))


def test_diagonalize_cluster_eigenvectors():
    rng = np.random.default_rng(6)
    A = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    cluster = (0, 2)
    lams, X, Y = diagonalize_cluster(A, cluster)
    assert np.allclose(lams, cluster_eigenvalues(A, cluster))
    assert np.allclose(A @ X, X * lams, atol=1e-12)
    assert np.allclose(Y.conj().T @ A, lams[:, None] * Y.conj().T, atol=1e-12)
    assert np.allclose(np.diag(Y.conj().T @ X), 1.0)


def test_diagonalize_cluster_repeated_eigenvalue():
    A = np.array([[2.0, 1.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, -1.0]])
    Q, T = schur_decompose(A)
    idx = tuple(i for i, z in enumerate(np.diag(T)) if abs(z - 2) < 1e-6)
    with pytest.raises(RepeatedEigenvalueError):
        diagonalize_cluster(A, idx)


@settings(max_examples=25, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    m=st.integers(3, 12),
    d=st.integers(1, 5),
    real=st.booleans(),
)
def test_triple_residuals_property(seed, m, d, real):
    d = min(d, m - 1)
    rng = np.random.default_rng(seed)
    A, lam = random_clustered_matrix(rng, m, d, center=rng.standard_normal(), real=real)
    t = block_diagonalize(A, schur_indices_near(A, lam))
    r1, r2, r3 = t.residuals(A)
    assert max(r1, r2, r3) <= 1e-10 * np.linalg.norm(A)
