"""Exceptions raised by the solver and its building blocks."""


class VersalError(Exception):
    """Base class for numerical failures in this package."""


class InseparableClusterError(VersalError):
    """The selected eigenvalue cluster cannot be split from the rest of the spectrum.

    ``separation`` carries the estimated sep(S, S') when it is known.
    """

    def __init__(self, message, separation=None):
        super().__init__(message)
        self.separation = separation


class ReorderError(InseparableClusterError):
    """An adjacent swap in the Schur form failed; ``pair`` holds the two eigenvalues."""

    def __init__(self, message, pair):
        super().__init__(message, separation=abs(pair[0] - pair[1]))
        self.pair = pair


class RankDeficientError(VersalError):
    """The linearized system does not have full row rank."""

    def __init__(self, message, singular_values=None):
        super().__init__(message)
        self.singular_values = singular_values


class ChainDegenerateError(VersalError):
    """X (S - lambda I)^(d-1) vanishes, so no eigenvector can be extracted."""

    def __init__(self, message, norm):
        super().__init__(message)
        self.norm = norm


class ClusterSelectionError(VersalError, ValueError):
    """No admissible eigenvalue cluster exists for the request."""


class RepeatedEigenvalueError(VersalError):
    """A selected eigenvalue is repeated, so eigenvector-based formulas do not apply."""
