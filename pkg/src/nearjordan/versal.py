"""Values and first derivatives of the versal deformation functions q_1..q_d.

Near a d-fold nonderogatory eigenvalue the matrix restricted to the cluster
is similar to

    B = q_1 I + J_0 + sum_{i>=2} q_i E_{i1},

and the stratum is the zero set of q_2, ..., q_d.  Everything here is computed
from an invariant triple (S, X, Y) at a single point.
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from nearjordan.invariant import InvariantTriple

__all__ = [
    "VersalValues",
    "VersalLinearization",
    "versal_values",
    "companion_matrix",
    "companion_traces",
    "versal_jacobian",
    "versal_matrix_gradients",
    "derivative_recurrence",
]


@dataclass
class VersalValues:
    """q_1 (mean eigenvalue) followed by the traceless coefficients q_2..q_d."""

    q: np.ndarray

    @property
    def d(self) -> int:
        return len(self.q)

    @property
    def q1(self) -> complex:
        return complex(self.q[0])

    @property
    def tail(self) -> np.ndarray:
        return self.q[1:]


@dataclass
class VersalLinearization:
    """Values of q and their first derivatives at one point.

    Exactly one of ``jacobian`` (d x n, parameter mode) or ``gradients``
    (d x m x m, matrix mode; entry [i, j, k] is dq_i/da_jk) is set.
    """

    values: VersalValues
    jacobian: Optional[np.ndarray] = None
    gradients: Optional[np.ndarray] = None

    @property
    def mode(self) -> str:
        return "family" if self.jacobian is not None else "matrix"

    def rows(self) -> np.ndarray:
        """Derivatives as a d x N matrix acting on the flattened unknown."""
        if self.jacobian is not None:
            return self.jacobian
        d = self.gradients.shape[0]
        return self.gradients.reshape(d, -1)


def versal_values(S) -> VersalValues:
    """q-values of a d x d restriction S.

    q_1 = trace(S)/d, and q_2..q_d satisfy
    z^d - q_2 z^(d-2) - ... - q_d = det((z + q_1) I - S).
    """
    S = np.atleast_2d(np.asarray(S, dtype=complex))
    d = S.shape[0]
    q1 = np.trace(S) / d
    if _is_upper_triangular(S):
        roots = np.diag(S) - q1
    else:
        roots = np.linalg.eigvals(S) - q1
    coeffs = np.poly(roots) if d > 0 else np.array([1.0])
    q = np.empty(d, dtype=complex)
    q[0] = q1
    q[1:] = -coeffs[2:]
    return VersalValues(q=q)


def companion_matrix(values) -> np.ndarray:
    """C = J_0 + sum_i q_i E_{i1}: ones on the superdiagonal, (0, q_2..q_d) in column one."""
    q = values.q if isinstance(values, VersalValues) else np.asarray(values)
    d = len(q)
    C = np.diag(np.ones(d - 1, dtype=complex), 1)
    C[1:, 0] = q[1:]
    return C


def companion_traces(values):
    """Traces needed by the derivative recurrence.

    Returns ``(tr, first_row)`` where ``tr[i] = trace(C^i)`` and
    ``first_row[i, k] = trace(C^i E_{k1}) = (C^i)[0, k]`` for i = 0..d-1.
    """
    C = companion_matrix(values)
    d = C.shape[0]
    tr = np.empty(d, dtype=complex)
    first_row = np.empty((d, d), dtype=complex)
    P = np.eye(d, dtype=complex)
    for i in range(d):
        tr[i] = np.trace(P)
        first_row[i] = P[0]
        P = P @ C
    return tr, first_row


def _shifted_powers(S, q1, d):
    M = S - q1 * np.eye(d)
    powers = [np.eye(d, dtype=complex)]
    for _ in range(1, d):
        powers.append(powers[-1] @ M)
    return powers


def derivative_recurrence(values, base):
    """Apply the triangular recurrence to base[i] = trace((S - q1 I)^i Y^* dA X)."""
    d = values.d
    tr, first_row = companion_traces(values)
    out = np.empty_like(base)
    out[0] = base[0] / d
    for i in range(1, d):
        acc = base[i] - tr[i] * out[0]
        for k in range(1, i):
            acc = acc - first_row[i, k] * out[k]
        out[i] = acc
    return out


def versal_jacobian(
    triple: InvariantTriple,
    values: VersalValues,
    dA: Sequence[np.ndarray],
) -> VersalLinearization:
    """Jacobian [dq_i/dp_j] from the derivatives dA[j] = dA/dp_j at the same point."""
    S, X, Y = triple.S, triple.X, triple.Y
    d = S.shape[0]
    if values.d != d:
        raise ValueError(f"values have d={values.d} but triple has d={d}")
    dA = np.asarray(dA, dtype=complex)
    if dA.ndim == 2:
        dA = dA[None]
    m = X.shape[0]
    if dA.ndim != 3 or dA.shape[1:] != (m, m):
        raise ValueError(f"expected derivatives of shape (n, {m}, {m}), got {dA.shape}")
    # W[j] = Y^* dA_j X
    W = np.einsum("ai,jab,bk->jik", Y.conj(), dA, X)
    powers = _shifted_powers(S, values.q1, d)
    base = np.stack([np.einsum("ik,jki->j", P, W) for P in powers])
    return VersalLinearization(values=values, jacobian=derivative_recurrence(values, base))


def versal_matrix_gradients(triple: InvariantTriple, values: VersalValues) -> VersalLinearization:
    """Gradients dq_i/dA as m x m matrices, entry (j, k) being dq_i/da_jk."""
    S, X, Y = triple.S, triple.X, triple.Y
    d = S.shape[0]
    if values.d != d:
        raise ValueError(f"values have d={values.d} but triple has d={d}")
    powers = _shifted_powers(S, values.q1, d)
    Yh = Y.conj().T
    base = np.stack([(X @ P @ Yh).T for P in powers])
    return VersalLinearization(values=values, gradients=derivative_recurrence(values, base))


def _is_upper_triangular(S) -> bool:
    return not np.any(np.tril(S, -1))
