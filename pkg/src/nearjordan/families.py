"""Parameter-dependent matrices A(p) and the reference problems.

A family exposes ``evaluate(p)`` and ``derivative(p, j)``; the latter falls
back to central finite differences when no analytic derivative is supplied.
"""

from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "MatrixFamily",
    "AffineFamily",
    "finite_difference_derivative",
    "family_swallow_tail",
    "family_example1",
    "family_versal_form",
    "matrix_example2",
    "example2_perturbation",
    "matrix_frank",
]

EPS = np.finfo(float).eps


class MatrixFamily:
    """An m x m matrix depending on n parameters.

    Parameters
    ----------
    m, n
        Matrix dimension and parameter count.
    evaluate
        Callable ``p -> A(p)``.
    derivative
        Optional callable ``(p, j) -> dA/dp_j``.  When omitted, central
        differences are used.
    domain
        ``"real"`` or ``"complex"``; the parameter domain.
    """

    def __init__(
        self,
        m: int,
        n: int,
        evaluate: Callable,
        derivative: Optional[Callable] = None,
        domain: str = "complex",
        name: str = "",
    ):
        if domain not in ("real", "complex"):
            raise ValueError(f"domain must be 'real' or 'complex', got {domain!r}")
        self.m = int(m)
        self.n = int(n)
        self._evaluate = evaluate
        self._derivative = derivative
        self.domain = domain
        self.name = name

    @property
    def analytic(self) -> bool:
        return self._derivative is not None

    def _check_p(self, p):
        p = _as_parameters(p, self.domain)
        if p.shape != (self.n,):
            raise ValueError(f"expected {self.n} parameters, got shape {p.shape}")
        return p

    def evaluate(self, p) -> np.ndarray:
        p = self._check_p(p)
        A = np.asarray(self._evaluate(p), dtype=complex)
        if A.shape != (self.m, self.m):
            raise ValueError(f"family returned shape {A.shape}, expected {(self.m, self.m)}")
        return A

    def derivative(self, p, j: int) -> np.ndarray:
        if not 0 <= j < self.n:
            raise IndexError(f"parameter index {j} out of range for n={self.n}")
        if self._derivative is None:
            return finite_difference_derivative(self, p, j)
        return np.asarray(self._derivative(self._check_p(p), j), dtype=complex)

    def derivatives(self, p) -> np.ndarray:
        """All n derivatives stacked as an (n, m, m) array."""
        return np.stack([self.derivative(p, j) for j in range(self.n)])

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return f"<MatrixFamily{label} m={self.m} n={self.n} domain={self.domain}>"


class AffineFamily(MatrixFamily):
    """A(p) = A0 + sum_j p_j D_j."""

    def __init__(self, A0, derivs, domain: str = "complex", name: str = ""):
        A0 = np.asarray(A0, dtype=complex)
        D = np.asarray(derivs, dtype=complex)
        if D.ndim == 2:
            D = D[None]
        if A0.ndim != 2 or A0.shape[0] != A0.shape[1]:
            raise ValueError(f"A0 must be square, got {A0.shape}")
        if D.shape[1:] != A0.shape:
            raise ValueError(f"derivative matrices have shape {D.shape[1:]}, expected {A0.shape}")
        self.A0 = A0
        self.D = D
        super().__init__(
            A0.shape[0],
            D.shape[0],
            evaluate=lambda p: self.A0 + np.tensordot(p, self.D, axes=1),
            derivative=lambda p, j: self.D[j].copy(),
            domain=domain,
            name=name,
        )


def finite_difference_derivative(family: MatrixFamily, p, j: int, step: Optional[float] = None):
    """Central difference (A(p + h e_j) - A(p - h e_j)) / 2h.

    The default step is sqrt(eps) * (1 + |p_j|).
    """
    p = _as_parameters(p, family.domain)
    if step is None:
        step = np.sqrt(EPS) * (1.0 + abs(p[j]))
    if step <= 0:
        raise ValueError("finite-difference step must be positive")
    # make p_j + h exactly representable so that h is the true step
    step = float(np.real((p[j] + step) - p[j])) if np.isreal(p[j]) else step
    e = np.zeros(family.n, dtype=p.dtype)
    e[j] = step
    return (family.evaluate(p + e) - family.evaluate(p - e)) / (2 * step)


def _as_parameters(p, domain):
    # a real family is still evaluated at complex points when asked to
    p = np.asarray(p)
    if domain == "real" and not (np.iscomplexobj(p) and np.any(p.imag)):
        return np.real(p).astype(float)
    return p.astype(complex)


def _unit(m, i, j):
    E = np.zeros((m, m))
    E[i, j] = 1.0
    return E


def family_swallow_tail() -> AffineFamily:
    """4 x 4 family whose characteristic polynomial is z^4 - p1 z^2 - p2 z - p3."""
    A0 = np.diag(np.ones(3), 1)
    D = [_unit(4, 1, 0), _unit(4, 2, 0), _unit(4, 3, 0)]
    return AffineFamily(A0, D, domain="real", name="swallow-tail")


def family_example1() -> AffineFamily:
    """[[1, 3, 0], [p1, 1, p2], [2, 3, 1]]; double eigenvalue -2 at p = (0, 9)."""
    A0 = np.array([[1.0, 3.0, 0.0], [0.0, 1.0, 0.0], [2.0, 3.0, 1.0]])
    D = [_unit(3, 1, 0), _unit(3, 1, 2)]
    return AffineFamily(A0, D, domain="real", name="example1")


def family_versal_form(d: int) -> AffineFamily:
    """B(p) = p_1 I + J_0 + sum_{i>=2} p_i E_{i1}, so that q(p) = p."""
    if d < 1:
        raise ValueError("d must be positive")
    A0 = np.diag(np.ones(d - 1), 1)
    D = [np.eye(d)] + [_unit(d, i, 0) for i in range(1, d)]
    return AffineFamily(A0, D, domain="complex", name=f"versal-{d}")


EXAMPLE2_E = np.array([[3.0, 4.0, 2.0], [8.0, 3.0, 6.0], [4.0, 9.0, 6.0]])


def example2_perturbation() -> np.ndarray:
    return EXAMPLE2_E.copy()


def matrix_example2(epsilon: float = 2.2e-15, delta: float = 1.5e-9) -> np.ndarray:
    """A1 + epsilon E with A1 = [[0, 1, 0], [0, 0, delta], [0, 0, 0]]."""
    A1 = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, delta], [0.0, 0.0, 0.0]])
    return A1 + epsilon * EXAMPLE2_E


def matrix_frank(n: int = 12) -> np.ndarray:
    """Frank matrix: a_ij = n + 1 - max(i, j) for j >= i - 1, zero below the subdiagonal."""
    if n < 1:
        raise ValueError("n must be positive")
    i, j = np.indices((n, n)) + 1
    return np.where(j >= i - 1, n + 1 - np.maximum(i, j), 0).astype(float)


def coerce_parameters(family: MatrixFamily, p: Sequence) -> np.ndarray:
    return family._check_p(p)
