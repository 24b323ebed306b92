"""Multiple eigenvalue and Jordan chain at a point of the stratum."""

from dataclasses import dataclass

import numpy as np

from nearjordan.errors import ChainDegenerateError
from nearjordan.invariant import InvariantTriple

__all__ = ["JordanChain", "jordan_block", "multiple_eigenvalue", "jordan_chain", "chain_residual"]

EPS = np.finfo(float).eps


@dataclass
class JordanChain:
    """Eigenvalue ``lam`` with generalized eigenvectors as columns of ``U``.

    ``residual`` is ||A U - U J_lam||_F / ||U||_F for the matrix the chain was
    built from.
    """

    lam: complex
    U: np.ndarray
    residual: float = float("nan")

    @property
    def d(self) -> int:
        return self.U.shape[1]

    @property
    def cond(self) -> float:
        return float(np.linalg.cond(self.U))


def jordan_block(lam, d) -> np.ndarray:
    return lam * np.eye(d, dtype=complex) + np.diag(np.ones(d - 1), 1)


def multiple_eigenvalue(S) -> complex:
    S = np.atleast_2d(np.asarray(S))
    return complex(np.trace(S) / S.shape[0])


def jordan_chain(triple: InvariantTriple, A=None) -> JordanChain:
    """Jordan chain u_i = X (S - lam I)^(d-i) k normalized against a unit eigenvector.

    The reference eigenvector is the largest-norm column of X (S - lam I)^(d-1)
    (lowest index on ties), scaled to unit norm with its largest-magnitude entry
    made real positive.  k then solves u_hat^* u_1 = 1, u_hat^* u_i = 0 (i >= 2).

    If ``A`` is given the residual is filled in.

    Raises
    ------
    ChainDegenerateError
        If X (S - lam I)^(d-1) is numerically zero.
    """
    S, X = triple.S, triple.X
    d = S.shape[0]
    lam = multiple_eigenvalue(S)
    N = S - lam * np.eye(d)
    # XN[i] = X N^i
    XN = [X.astype(complex)]
    for _ in range(1, d):
        XN.append(XN[-1] @ N)
    P = XN[d - 1]
    pnorm = float(np.linalg.norm(P))
    nscale = max(np.linalg.norm(N), np.linalg.norm(S), 1e-300)
    floor = d * EPS * np.linalg.norm(X) * nscale ** (d - 1)
    if pnorm <= floor or pnorm == 0.0:
        raise ChainDegenerateError(
            f"||X (S - lam I)^{d - 1}|| = {pnorm:.3e} is numerically zero; "
            "point is not on the stratum or the eigenvalue is derogatory",
            norm=pnorm,
        )
    col = _first_max(np.linalg.norm(P, axis=0))
    u_hat = P[:, col] / np.linalg.norm(P[:, col])
    big = _first_max(np.abs(u_hat))
    u_hat = u_hat * (abs(u_hat[big]) / u_hat[big])

    # row i encodes u_hat^* u_{i+1}, where u_{i+1} = X N^(d-1-i) k
    G = np.stack([u_hat.conj() @ XN[d - 1 - i] for i in range(d)])
    rhs = np.zeros(d, dtype=complex)
    rhs[0] = 1.0
    k = np.linalg.solve(G, rhs)
    U = np.column_stack([XN[d - 1 - i] @ k for i in range(d)])
    chain = JordanChain(lam=lam, U=U)
    if A is not None:
        chain.residual = chain_residual(A, chain)
    return chain


def _first_max(values, rtol=1e-8):
    """Index of the largest value; values within rtol of the maximum count as ties."""
    return int(np.flatnonzero(values >= values.max() * (1 - rtol))[0])


def chain_residual(A, chain: JordanChain) -> float:
    A = np.asarray(A, dtype=complex)
    U = chain.U
    if A.shape[0] != U.shape[0]:
        raise ValueError(f"matrix is {A.shape} but chain vectors have length {U.shape[0]}")
    R = A @ U - U @ jordan_block(chain.lam, U.shape[1])
    return float(np.linalg.norm(R) / np.linalg.norm(U))
