"""Invariant subspaces of an eigenvalue cluster.

Produces the triple (S, X, Y) with

    A X = X S,    Y^* A = S Y^*,    Y^* X = I

for a chosen set of d eigenvalues, either from a reordered complex Schur form
followed by block-diagonalization (the stable route) or from plain left/right
eigenvectors (only valid for simple eigenvalues).
"""

import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack
from scipy.optimize import linear_sum_assignment

from nearjordan.errors import (
    InseparableClusterError,
    ReorderError,
    RepeatedEigenvalueError,
    VersalError,
)

__all__ = [
    "ClusterSelection",
    "InvariantTriple",
    "SeparationWarning",
    "as_square_matrix",
    "schur_decompose",
    "reorder_cluster",
    "block_diagonalize",
    "triple_from_schur",
    "separation_estimate",
    "diagonalize_cluster",
]

EPS = np.finfo(float).eps

# sep(S, S') below this multiple of eps * ||A||_F triggers a warning, and below
# the second multiple the Sylvester solve is refused.
SEPARATION_WARNING_FACTOR = 1e3
SEPARATION_ERROR_FACTOR = 10.0


class SeparationWarning(UserWarning):
    """Cluster and complement are close; block-diagonalization may be inaccurate."""


@dataclass(frozen=True)
class ClusterSelection:
    """Ordered positions of d eigenvalues in a Schur diagonal or eigenvalue list."""

    indices: Tuple[int, ...]

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if len(idx) == 0:
            raise ValueError("cluster must select at least one eigenvalue")
        if len(set(idx)) != len(idx):
            raise ValueError(f"cluster indices must be distinct, got {idx}")
        if min(idx) < 0:
            raise ValueError(f"cluster indices must be nonnegative, got {idx}")
        object.__setattr__(self, "indices", idx)

    @property
    def d(self) -> int:
        return len(self.indices)

    def check(self, m: int) -> None:
        if self.d > m:
            raise ValueError(f"cluster of size {self.d} exceeds matrix dimension {m}")
        if max(self.indices) >= m:
            raise ValueError(f"cluster index {max(self.indices)} out of range for m={m}")


@dataclass
class InvariantTriple:
    """Restriction of a matrix to the invariant subspace of a cluster."""

    S: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    cluster: ClusterSelection
    eigenvalues: np.ndarray
    separation: float = np.inf
    complement: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def d(self) -> int:
        return self.S.shape[0]

    def residuals(self, A) -> Tuple[float, float, float]:
        """Frobenius norms of A X - X S, Y^* A - S Y^* and Y^* X - I."""
        A = np.asarray(A)
        Yh = self.Y.conj().T
        r1 = np.linalg.norm(A @ self.X - self.X @ self.S)
        r2 = np.linalg.norm(Yh @ A - self.S @ Yh)
        r3 = np.linalg.norm(Yh @ self.X - np.eye(self.d))
        return float(r1), float(r2), float(r3)


def as_square_matrix(A) -> np.ndarray:
    """Validate and convert to a complex square array."""
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if A.shape[0] == 0:
        raise ValueError("matrix must be at least 1x1")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def schur_decompose(A) -> Tuple[np.ndarray, np.ndarray]:
    """Complex Schur form ``A = Q T Q^*`` with T upper triangular."""
    A = as_square_matrix(A)
    try:
        T, Q = sla.schur(A, output="complex")
    except (sla.LinAlgError, ValueError) as exc:
        raise VersalError(f"Schur decomposition failed: {exc}") from exc
    return Q, T


def _swap_adjacent(Q, T, k):
    """Exchange diagonal entries k and k+1 of T by a unitary similarity (in place)."""
    a, b, c = T[k, k], T[k + 1, k + 1], T[k, k + 1]
    # eigenvector of [[a, c], [0, b]] for b
    v = np.array([c, b - a])
    nv = np.linalg.norm(v)
    if nv == 0.0:
        return
    v = v / nv
    Z = np.array([[v[0], -np.conj(v[1])], [v[1], np.conj(v[0])]])
    T[:, k : k + 2] = T[:, k : k + 2] @ Z
    T[k : k + 2, :] = Z.conj().T @ T[k : k + 2, :]
    Q[:, k : k + 2] = Q[:, k : k + 2] @ Z
    T[k + 1, k] = 0.0
    T[k, k], T[k + 1, k + 1] = b, a


def reorder_cluster(Q, T, cluster) -> Tuple[np.ndarray, np.ndarray]:
    """Move the selected diagonal entries of T to the leading positions.

    The selected eigenvalues end up in the order given by ``cluster``; the
    remaining ones keep their relative order.  Returns new arrays.

    Raises
    ------
    ReorderError
        If a selected eigenvalue must pass a numerically equal unselected one.
    """
    cluster = _as_cluster(cluster)
    Q = np.array(Q, dtype=complex)
    T = np.array(T, dtype=complex)
    m = T.shape[0]
    cluster.check(m)
    tol = 10 * EPS * max(np.linalg.norm(T), 1e-300)
    selected = set(cluster.indices)
    # pos[k] = original index now sitting at diagonal position k
    pos = list(range(m))
    for target, orig in enumerate(cluster.indices):
        j = pos.index(orig)
        while j > target:
            a, b = T[j - 1, j - 1], T[j, j]
            if abs(a - b) <= tol and pos[j - 1] not in selected:
                raise ReorderError(
                    f"cannot separate eigenvalue {b} (index {orig}) from numerically "
                    f"equal eigenvalue {a} (index {pos[j - 1]})",
                    pair=(complex(b), complex(a)),
                )
            _swap_adjacent(Q, T, j - 1)
            pos[j - 1], pos[j] = pos[j], pos[j - 1]
            j -= 1
    return Q, T


def _sylvester_operator(S, Sp):
    d, r = S.shape[0], Sp.shape[0]
    # column-major vec: vec(S Z - Z S') = (I kron S - S'^T kron I) vec(Z)
    return np.kron(np.eye(r), S) - np.kron(Sp.T, np.eye(d))


def separation_estimate(S, S_complement) -> float:
    """Smallest singular value of the Sylvester operator Z -> S Z - Z S'."""
    S = np.atleast_2d(np.asarray(S, dtype=complex))
    Sp = np.atleast_2d(np.asarray(S_complement, dtype=complex))
    if S.size == 0 or Sp.size == 0:
        return float("inf")
    L = _sylvester_operator(S, Sp)
    return float(np.linalg.svd(L, compute_uv=False)[-1])


def triple_from_schur(A, Q, T, cluster, warn_factor=SEPARATION_WARNING_FACTOR) -> InvariantTriple:
    """Block-diagonalize a Schur pair of A for the given cluster.

    Same as :func:`block_diagonalize` but reuses an existing Schur form, whose
    diagonal the cluster indices refer to.
    """
    A = as_square_matrix(A)
    cluster = _as_cluster(cluster)
    m = A.shape[0]
    cluster.check(m)
    d = cluster.d
    Q, T = reorder_cluster(Q, T, cluster)
    S = T[:d, :d].copy()
    eigs = np.diag(S).copy()
    if d == m:
        return InvariantTriple(S=S, X=Q.copy(), Y=Q.copy(), cluster=cluster, eigenvalues=eigs)

    T12, T22 = T[:d, d:], T[d:, d:]
    scale = max(np.linalg.norm(A), 1e-300)
    sep = separation_estimate(S, T22)
    if sep <= SEPARATION_ERROR_FACTOR * EPS * scale:
        raise InseparableClusterError(
            f"cluster {cluster.indices} is not separated from the remaining spectrum "
            f"(sep = {sep:.3e})",
            separation=sep,
        )
    if sep < warn_factor * EPS * scale:
        warnings.warn(
            f"small separation {sep:.3e} between cluster and complement; "
            "consider enlarging the cluster",
            SeparationWarning,
            stacklevel=3,
        )
    # S Z - Z T22 = -T12
    Z, sc, info = lapack.ztrsyl(S, T22, -T12, isgn=-1)
    if info < 0 or not np.all(np.isfinite(Z)):
        raise InseparableClusterError(
            f"Sylvester solve failed for cluster {cluster.indices} (info={info})", separation=sep
        )
    Z = Z / sc
    Q1, Q2 = Q[:, :d], Q[:, d:]
    X = Q1.copy()
    Y = Q1 - Q2 @ Z.conj().T
    return InvariantTriple(
        S=S, X=X, Y=Y, cluster=cluster, eigenvalues=eigs, separation=sep, complement=T22.copy()
    )


def block_diagonalize(A, cluster, warn_factor=SEPARATION_WARNING_FACTOR) -> InvariantTriple:
    """Invariant triple of A for a cluster given as positions on the Schur diagonal.

    The cluster indices refer to ``np.diag(T)`` of :func:`schur_decompose(A)`.

    Raises
    ------
    InseparableClusterError
        If the cluster shares (numerically) an eigenvalue with the complement.
    """
    Q, T = schur_decompose(A)
    return triple_from_schur(A, Q, T, cluster, warn_factor=warn_factor)


def diagonalize_cluster(A, cluster) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Right and left eigenvectors for simple eigenvalues of a cluster.

    Cluster indices refer to the Schur diagonal, as in :func:`block_diagonalize`.
    Returns ``(eigenvalues, X, Y)`` with ``y_i^* x_i = 1``; the matching
    restriction is ``S = diag(eigenvalues)``.
    """
    A = as_square_matrix(A)
    cluster = _as_cluster(cluster)
    m = A.shape[0]
    cluster.check(m)
    _, T = schur_decompose(A)
    target = np.diag(T)[list(cluster.indices)]

    w, vl, vr = sla.eig(A, left=True, right=True)
    scale = max(np.abs(w).max(), 1.0)
    for i in range(len(target)):
        for j in range(i + 1, len(target)):
            if abs(target[i] - target[j]) <= np.sqrt(EPS) * scale:
                raise RepeatedEigenvalueError(
                    f"selected eigenvalues {target[i]} and {target[j]} coincide; "
                    "use block_diagonalize instead"
                )
    cost = np.abs(target[:, None] - w[None, :])
    _, cols = linear_sum_assignment(cost)
    X = vr[:, cols]
    Y = vl[:, cols]
    for i in range(X.shape[1]):
        s = Y[:, i].conj() @ X[:, i]
        if abs(s) <= EPS * np.linalg.norm(X[:, i]) * np.linalg.norm(Y[:, i]):
            raise RepeatedEigenvalueError(
                f"eigenvalue {w[cols[i]]} is defective (y^* x = 0)"
            )
        Y[:, i] = Y[:, i] / np.conj(s)
    return w[cols], X, Y


def _as_cluster(cluster) -> ClusterSelection:
    if isinstance(cluster, ClusterSelection):
        return cluster
    if isinstance(cluster, (int, np.integer)):
        raise TypeError("cluster must be a sequence of indices")
    return ClusterSelection(tuple(cluster))


def cluster_eigenvalues(A, cluster: Sequence[int]) -> np.ndarray:
    """Schur-diagonal eigenvalues of A at the given positions."""
    _, T = schur_decompose(A)
    return np.diag(T)[list(_as_cluster(cluster).indices)]
