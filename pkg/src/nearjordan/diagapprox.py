"""First-order approximations built from simple-eigenvalue sensitivities.

When the cluster eigenvalues are simple, the derivative recurrence only needs
lambda_i and their gradients y_i^* (dA/dp_j) x_i.  For d = 2 this gives a
closed-form nearest point of the double-eigenvalue surface.  Treating the two
eigenvalues as smooth functions instead gives the right direction but twice
the distance.

These formulas lose accuracy near the stratum (the eigenvector basis becomes
ill-conditioned); the Newton solver never uses them.
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from nearjordan.families import MatrixFamily
from nearjordan.invariant import ClusterSelection, InvariantTriple, diagonalize_cluster
from nearjordan.versal import VersalLinearization, VersalValues, derivative_recurrence, versal_values

__all__ = [
    "EigenSensitivity",
    "eigen_sensitivities",
    "diagonal_triple",
    "versal_jacobian_diag",
    "nearest_double_step",
    "naive_crossing_step",
]


@dataclass
class EigenSensitivity:
    lam: complex
    gradient: np.ndarray


def eigen_sensitivities(family: MatrixFamily, p0, cluster) -> list:
    """Eigenvalues of the cluster and their parameter gradients at p0."""
    A = family.evaluate(p0)
    lams, X, Y = diagonalize_cluster(A, cluster)
    dA = family.derivatives(p0)
    grads = np.einsum("ai,jab,bi->ij", Y.conj(), dA, X)
    return [EigenSensitivity(lam=complex(l), gradient=g) for l, g in zip(lams, grads)]


def diagonal_triple(A, cluster) -> InvariantTriple:
    """Invariant triple with S = diag(lambda_1..lambda_d) from eigenvectors."""
    lams, X, Y = diagonalize_cluster(A, cluster)
    if not isinstance(cluster, ClusterSelection):
        cluster = ClusterSelection(tuple(cluster))
    return InvariantTriple(S=np.diag(lams), X=X, Y=Y, cluster=cluster, eigenvalues=lams)


def versal_jacobian_diag(
    sensitivities: Sequence[EigenSensitivity], values: Optional[VersalValues] = None
) -> VersalLinearization:
    """Jacobian of q_1..q_d from eigenvalues and their gradients alone."""
    lams = np.array([s.lam for s in sensitivities], dtype=complex)
    grads = np.array([s.gradient for s in sensitivities], dtype=complex)
    if values is None:
        values = versal_values(np.diag(lams))
    d = len(lams)
    shifted = lams - values.q1
    base = np.stack([(shifted**i) @ grads for i in range(d)])
    return VersalLinearization(values=values, jacobian=derivative_recurrence(values, base))


def _gradient_gap(s1, s2):
    g = np.asarray(s2.gradient, dtype=complex) - np.asarray(s1.gradient, dtype=complex)
    nrm2 = float(np.vdot(g, g).real)
    if nrm2 == 0.0:
        raise ValueError("eigenvalue gradients coincide; step direction undefined")
    return g, nrm2


def nearest_double_step(s1: EigenSensitivity, s2: EigenSensitivity, p0) -> np.ndarray:
    """First-order nearest point of the double-eigenvalue surface.

    p = p0 - conj(grad l2 - grad l1) * delta / ||grad l2 - grad l1||^2,
    delta = (l2 - l1) / 2.
    """
    g, nrm2 = _gradient_gap(s1, s2)
    delta = (s2.lam - s1.lam) / 2
    return np.asarray(p0) - g.conj() * delta / nrm2


def naive_crossing_step(s1: EigenSensitivity, s2: EigenSensitivity, p0) -> np.ndarray:
    """Crossing point of the linearized eigenvalues l1(p) = l2(p).

    Same direction as :func:`nearest_double_step` but twice as far.
    """
    g, nrm2 = _gradient_gap(s1, s2)
    return np.asarray(p0) - g.conj() * (s2.lam - s1.lam) / nrm2
