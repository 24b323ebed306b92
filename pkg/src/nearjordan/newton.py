"""Newton iteration onto the stratum of d-fold nonderogatory eigenvalues.

Each iteration block-diagonalizes the current matrix for a cluster of d
eigenvalues, linearizes q_2 = ... = q_d = 0 and takes the minimum-norm
solution.  Two front ends share the loop: :func:`newton_iterate` for a
parameter family A(p) and :func:`nearest_defective_matrix` where every matrix
entry is a free parameter.
"""

import itertools
import warnings
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from nearjordan.chain import JordanChain, jordan_chain
from nearjordan.errors import (
    ChainDegenerateError,
    ClusterSelectionError,
    RankDeficientError,
    VersalError,
)
from nearjordan.families import MatrixFamily
from nearjordan.invariant import (
    ClusterSelection,
    SeparationWarning,
    as_square_matrix,
    schur_decompose,
    triple_from_schur,
)
from nearjordan.versal import (
    VersalLinearization,
    versal_jacobian,
    versal_matrix_gradients,
    versal_values,
)

__all__ = [
    "NewtonConfig",
    "IterationRecord",
    "NewtonResult",
    "assemble_linear_system",
    "solve_step",
    "approximate_eigenvalue",
    "select_cluster",
    "auto_cluster",
    "newton_iterate",
    "nearest_defective_matrix",
]

EPS = np.finfo(float).eps
STRATEGIES = ("nearest-to-reference", "least-squares")
# imaginary rows smaller than this fraction of the real row are rounding noise
IMAG_ROW_TOL = 1e-6
DISK_GAP_RTOL = 1e-6


@dataclass
class NewtonConfig:
    """Options for the Newton solvers.

    ``step_tolerance`` is relative to max(1, ||p0||) (Frobenius norm of A0 in
    matrix mode).  ``real_parameters=None`` means: real if the family domain
    (or the input matrix) is real.  ``q_tolerance`` is the post-convergence
    bound on |q_i|, i >= 2, relative to max(1, ||A||_F).  With ``damping``
    a step is halved (up to ten times) while it increases the residual of the
    q equations; below rounding level the full step is always taken.
    """

    max_iterations: int = 20
    step_tolerance: float = 1e-12
    solve_strategy: str = "nearest-to-reference"
    real_parameters: Optional[bool] = None
    target_eigenvalue: Optional[complex] = None
    separation_warning_threshold: float = 1e3
    q_tolerance: float = 1e-10
    rank_rcond: float = 1e-13
    damping: bool = False

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if not self.step_tolerance > 0:
            raise ValueError("step_tolerance must be positive")
        if not self.q_tolerance > 0:
            raise ValueError("q_tolerance must be positive")
        if self.solve_strategy not in STRATEGIES:
            raise ValueError(f"solve_strategy must be one of {STRATEGIES}")


@dataclass
class IterationRecord:
    iteration: int
    point: np.ndarray
    q: np.ndarray
    cluster: tuple
    cluster_eigenvalues: np.ndarray
    separation: float
    step_norm: float
    lambda_app: complex
    distance: float


@dataclass
class NewtonResult:
    """Outcome of a Newton solve.

    ``p_star`` is a parameter vector (family mode) or a matrix (matrix mode);
    ``distance`` is ||p_star - p0|| (Frobenius in matrix mode).
    """

    converged: bool
    p_star: np.ndarray
    p0: np.ndarray
    mode: str
    d: int
    iterations: List[IterationRecord] = field(default_factory=list)
    distance: float = float("nan")
    chain: Optional[JordanChain] = None
    q_star: Optional[np.ndarray] = None
    message: str = ""

    @property
    def lam(self) -> Optional[complex]:
        return None if self.chain is None else self.chain.lam

    @property
    def n_iterations(self) -> int:
        return len(self.iterations)

    @property
    def one_step_distance(self) -> float:
        return self.iterations[0].distance if self.iterations else float("nan")


def _split_real(M, rhs):
    rows, vals = [], []
    for r, b in zip(M, rhs):
        rows.append(r.real)
        vals.append(b.real)
        if np.linalg.norm(r.imag) > IMAG_ROW_TOL * max(np.linalg.norm(r.real), 1e-300):
            rows.append(r.imag)
            vals.append(b.imag)
    return np.array(rows, dtype=float), np.array(vals, dtype=float)


def assemble_linear_system(lin: VersalLinearization, config: Optional[NewtonConfig] = None, real=None):
    """Rows of q_i + <dq_i, dp> = 0 for i = 2..d, plus the target row if requested.

    In real mode each complex row is split into real and imaginary parts; an
    imaginary part at rounding level (the cluster is closed under conjugation)
    is dropped.
    """
    config = config or NewtonConfig()
    real = config.real_parameters if real is None else real
    R = lin.rows()
    q = lin.values.q
    M = R[1:]
    rhs = -q[1:]
    if config.target_eigenvalue is not None:
        M = np.vstack([M, R[:1]])
        rhs = np.concatenate([rhs, [complex(config.target_eigenvalue) - q[0]]])
    if real:
        return _split_real(M, rhs)
    return M, rhs


def solve_step(M, rhs, offset=None, strategy="nearest-to-reference", rcond=1e-13):
    """Minimum-norm step for M dp = rhs.

    With ``offset = current - reference`` and the nearest-to-reference strategy
    the returned step lands on the solution of the linear system closest to the
    reference point.  The least-squares strategy ignores ``offset``.

    Raises
    ------
    RankDeficientError
        If M does not have full rank.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    M = np.atleast_2d(M)
    rhs = np.asarray(rhs).ravel()
    use_offset = strategy == "nearest-to-reference" and offset is not None
    if use_offset:
        offset = np.asarray(offset).ravel()
        rhs = rhs + M @ offset
    rows, cols = M.shape
    norms = np.linalg.norm(M, axis=1)
    if np.any(norms == 0.0):
        raise RankDeficientError(
            "linearized system has a zero row; look for an eigenvalue with a more "
            "degenerate Jordan structure (higher multiplicity)",
            singular_values=np.zeros(1),
        )
    if rows <= cols:
        # row scaling leaves the minimum-norm solution unchanged
        Ms, bs = M / norms[:, None], rhs / norms
    else:
        Ms, bs = M, rhs
    sv = np.linalg.svd(Ms, compute_uv=False)
    if sv[-1] <= rcond * sv[0]:
        raise RankDeficientError(
            f"linearized system is rank deficient (singular values {sv}); look for an "
            "eigenvalue with a more degenerate Jordan structure (higher multiplicity)",
            singular_values=sv,
        )
    delta = np.linalg.lstsq(Ms, bs, rcond=None)[0]
    if use_offset:
        return delta - offset
    return delta


def approximate_eigenvalue(lin: VersalLinearization, dp) -> complex:
    """First-order multiple eigenvalue q_1 + <dq_1, dp>."""
    row = lin.rows()[0]
    return complex(lin.values.q1 + row @ np.asarray(dp).ravel())


def _is_real_value(z, scale=1.0):
    return abs(np.imag(z)) <= np.sqrt(EPS) * max(1.0, abs(z), scale)


def select_cluster(eigenvalues, lambda_app, d, real=False) -> ClusterSelection:
    """The d eigenvalues nearest to ``lambda_app`` (lower index wins ties).

    In real mode with a real target, complex eigenvalues are only taken
    together with their conjugate partner.
    """
    eigs = np.asarray(eigenvalues, dtype=complex)
    m = len(eigs)
    if d > m:
        raise ClusterSelectionError(f"cannot select {d} eigenvalues out of {m}")
    dist = np.abs(eigs - lambda_app)
    order = np.argsort(dist, kind="stable")
    scale = float(np.abs(eigs).max(initial=0.0))
    if not (real and _is_real_value(lambda_app, scale)):
        return ClusterSelection(tuple(int(i) for i in order[:d]))
    # the spectrum of a real matrix inside a disk centred on the real axis is
    # conjugate-closed, so a clean gap after the d-th eigenvalue settles it
    if d == m or dist[order[d - 1]] < (1 - DISK_GAP_RTOL) * dist[order[d]]:
        return ClusterSelection(tuple(int(i) for i in order[:d]))

    chosen: List[int] = []
    used = set()
    for i in order:
        i = int(i)
        if i in used or len(chosen) == d:
            continue
        if _is_real_value(eigs[i], scale):
            chosen.append(i)
            used.add(i)
            continue
        free = [j for j in range(m) if j not in used and j != i]
        if not free:
            continue
        partner = min(free, key=lambda j: abs(eigs[j] - np.conj(eigs[i])))
        if d - len(chosen) >= 2:
            chosen += [i, partner]
            used.update((i, partner))
    if len(chosen) < d:
        raise ClusterSelectionError(
            f"cannot form a conjugate-closed cluster of {d} eigenvalues near {lambda_app}"
        )
    return ClusterSelection(tuple(chosen))


def _conjugate_closed(vals, scale, rtol=1e-6):
    tol = rtol * max(scale, 1.0)
    remaining = list(vals)
    while remaining:
        z = remaining.pop(0)
        if _is_real_value(z, scale):
            continue
        if not remaining:
            return False
        k = int(np.argmin([abs(w - np.conj(z)) for w in remaining]))
        if abs(remaining[k] - np.conj(z)) > tol:
            return False
        remaining.pop(k)
    return True


class _Problem:
    """Adapter giving the loop a uniform view of family and matrix modes."""

    def __init__(self, mode, evaluate, linearize, x0, real, scale):
        self.mode = mode
        self.evaluate = evaluate
        self.linearize = linearize
        self.x0 = x0
        self.real = real
        self.scale = scale


def _analyze(problem, x, cluster, config, warn=True):
    A = problem.evaluate(x)
    Q, T = schur_decompose(A)
    with warnings.catch_warnings():
        if not warn:
            warnings.simplefilter("ignore", SeparationWarning)
        triple = triple_from_schur(A, Q, T, cluster, warn_factor=config.separation_warning_threshold)
    values = versal_values(triple.S)
    lin = problem.linearize(triple, values, x)
    return A, np.diag(T), triple, values, lin


def _step(problem, x, lin, config):
    M, rhs = assemble_linear_system(lin, config, real=problem.real)
    offset = x - problem.x0
    dx = solve_step(M, rhs, offset.ravel(), config.solve_strategy, rcond=config.rank_rcond)
    return dx.reshape(np.shape(x))


def auto_cluster(eigenvalues, d, config=None, problem=None, x=None) -> ClusterSelection:
    """Pick an initial cluster when none is given.

    For m <= 8 every admissible d-subset (conjugate-closed in real mode) is
    tried and the one whose first Newton step is shortest wins; otherwise the
    d-subset of smallest diameter is used.
    """
    eigs = np.asarray(eigenvalues, dtype=complex)
    m = len(eigs)
    config = config or NewtonConfig()
    if config.target_eigenvalue is not None:
        return select_cluster(eigs, config.target_eigenvalue, d, real=bool(problem and problem.real))
    if problem is not None and m <= 8:
        scale = float(np.abs(eigs).max(initial=0.0))
        subsets = list(itertools.combinations(range(m), d))
        if problem.real:
            closed = [s for s in subsets if _conjugate_closed(eigs[list(s)], scale)]
            subsets = closed or subsets
        best, best_norm = None, np.inf
        for s in subsets:
            try:
                _, _, _, _, lin = _analyze(problem, x, s, config, warn=False)
                dx = _step(problem, x, lin, config)
            except VersalError:
                continue
            nrm = float(np.linalg.norm(dx))
            if nrm < best_norm:
                best, best_norm = s, nrm
        if best is not None:
            return ClusterSelection(best)
    # smallest-diameter subset among "d nearest neighbours of each eigenvalue"
    best, best_spread = None, np.inf
    for i in range(m):
        idx = np.argsort(np.abs(eigs - eigs[i]), kind="stable")[:d]
        sub = eigs[idx]
        spread = float(np.abs(sub[:, None] - sub[None, :]).max())
        if spread < best_spread:
            best, best_spread = tuple(sorted(int(j) for j in idx)), spread
    return ClusterSelection(best)


def _resolve_cluster(initial, eigs, d, config, problem, x):
    if initial is None or (isinstance(initial, str) and initial == "auto"):
        return auto_cluster(eigs, d, config, x=x, problem=problem)
    if isinstance(initial, ClusterSelection):
        cluster = initial
    elif np.isscalar(initial):
        cluster = select_cluster(eigs, complex(initial), d, real=problem.real)
    else:
        cluster = ClusterSelection(tuple(initial))
    if cluster.d != d:
        raise ValueError(f"initial cluster has {cluster.d} entries, expected d={d}")
    cluster.check(len(eigs))
    return cluster


def _with_context(exc, k, history):
    exc.iteration = k
    exc.history = history
    if exc.args:
        exc.args = (f"iteration {k}: {exc.args[0]}",) + exc.args[1:]
    return exc


def _run(problem: _Problem, d: int, initial_cluster, config: NewtonConfig) -> NewtonResult:
    if d < 2:
        raise ValueError("multiplicity must be ≥ 2")
    x = problem.x0.copy()
    history: List[IterationRecord] = []
    tol = config.step_tolerance * problem.scale
    lam_app = None
    converged = False
    message = f"no convergence in {config.max_iterations} iterations"

    for k in range(config.max_iterations):
        try:
            A = problem.evaluate(x)
            Q, T = schur_decompose(A)
            eigs = np.diag(T)
            if k == 0:
                cluster = _resolve_cluster(initial_cluster, eigs, d, config, problem, x)
            else:
                cluster = select_cluster(eigs, lam_app, d, real=problem.real)
            triple = triple_from_schur(
                A, Q, T, cluster, warn_factor=config.separation_warning_threshold
            )
            values = versal_values(triple.S)
            lin = problem.linearize(triple, values, x)
            dx = _step(problem, x, lin, config)
            if config.damping:
                dx = _damp(problem, x, dx, values, lin, config)
        except (VersalError, ValueError) as exc:
            if isinstance(exc, VersalError):
                raise _with_context(exc, k, history)
            raise
        lam_app = approximate_eigenvalue(lin, dx)
        step = float(np.linalg.norm(dx))
        x = x + dx
        history.append(
            IterationRecord(
                iteration=k + 1,
                point=x.copy(),
                q=values.q.copy(),
                cluster=cluster.indices,
                cluster_eigenvalues=triple.eigenvalues.copy(),
                separation=triple.separation,
                step_norm=step,
                lambda_app=lam_app,
                distance=float(np.linalg.norm(x - problem.x0)),
            )
        )
        if step <= tol:
            converged = True
            message = "converged"
            break

    result = NewtonResult(
        converged=converged,
        p_star=x,
        p0=problem.x0.copy(),
        mode=problem.mode,
        d=d,
        iterations=history,
        distance=float(np.linalg.norm(x - problem.x0)),
        message=message,
    )
    # final analysis at p_star: q post-check and Jordan chain
    try:
        A = problem.evaluate(x)
        Q, T = schur_decompose(A)
        cluster = select_cluster(np.diag(T), lam_app, d, real=problem.real)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", SeparationWarning)
            triple = triple_from_schur(A, Q, T, cluster)
        values = versal_values(triple.S)
        result.q_star = values.q.copy()
        qmax = float(np.abs(values.tail).max(initial=0.0))
        qtol = config.q_tolerance * max(1.0, float(np.linalg.norm(A)))
        if converged and qmax > qtol:
            result.converged = False
            result.message = f"step criterion met but max |q_i| = {qmax:.3e} exceeds {qtol:.3e}"
        result.chain = jordan_chain(triple, A)
    except (VersalError, ChainDegenerateError) as exc:
        if result.converged:
            result.converged = False
            result.message = f"converged point rejected: {exc}"
        else:
            result.message += f"; chain unavailable: {exc}"
    return result


def _merit(values, config):
    r = float(np.linalg.norm(values.tail))
    if config.target_eigenvalue is not None:
        r = float(np.hypot(r, abs(values.q1 - complex(config.target_eigenvalue))))
    return r


def _damp(problem, x, dx, values, lin, config, max_halvings=10):
    """Halve the step while it increases the residual of the q equations."""
    q_old = _merit(values, config)
    A = problem.evaluate(x)
    if q_old <= 1e3 * EPS * max(1.0, float(np.linalg.norm(A))):
        # rounding level: a merit increase here carries no information
        return dx
    lam = approximate_eigenvalue(lin, dx)
    for _ in range(max_halvings):
        try:
            A = problem.evaluate(x + dx)
            Q, T = schur_decompose(A)
            cluster = select_cluster(np.diag(T), lam, values.d, real=problem.real)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", SeparationWarning)
                triple = triple_from_schur(A, Q, T, cluster)
            q_new = _merit(versal_values(triple.S), config)
        except VersalError:
            q_new = np.inf
        if q_new <= q_old:
            break
        dx = dx / 2
    return dx


def newton_iterate(
    family: MatrixFamily,
    p0,
    d: int,
    initial_cluster=None,
    config: Optional[NewtonConfig] = None,
) -> NewtonResult:
    """Nearest parameter vector at which A(p) has a d-fold nonderogatory eigenvalue.

    Parameters
    ----------
    family
        The matrix family.
    p0
        Starting (and, by default, reference) parameter vector.
    d
        Multiplicity, at least 2.
    initial_cluster
        Positions on the Schur diagonal of A(p0), a complex target near which
        to pick d eigenvalues, or ``None``/``"auto"``.
    config
        Solver options.
    """
    config = config or NewtonConfig()
    real = config.real_parameters
    if real is None:
        real = family.domain == "real"
    p0 = np.asarray(p0, dtype=float if real else complex)
    if p0.shape != (family.n,):
        raise ValueError(f"expected {family.n} parameters, got shape {p0.shape}")

    def linearize(triple, values, p):
        return versal_jacobian(triple, values, family.derivatives(p))

    problem = _Problem(
        "family",
        family.evaluate,
        linearize,
        p0,
        real=real,
        scale=max(1.0, float(np.linalg.norm(p0))),
    )
    return _run(problem, d, initial_cluster, config)


def nearest_defective_matrix(
    A0,
    d: int,
    initial_cluster=None,
    config: Optional[NewtonConfig] = None,
) -> NewtonResult:
    """Nearest matrix (Frobenius norm) to A0 with a d-fold nonderogatory eigenvalue.

    Real input is perturbed by real matrices unless ``config.real_parameters``
    is explicitly False.
    """
    config = config or NewtonConfig()
    A0c = as_square_matrix(A0)
    if d > A0c.shape[0]:
        raise ValueError(f"multiplicity {d} exceeds matrix dimension {A0c.shape[0]}")
    real = config.real_parameters
    if real is None:
        real = not np.any(A0c.imag)
    x0 = A0c.real.copy() if real else A0c.copy()

    def linearize(triple, values, A):
        return versal_matrix_gradients(triple, values)

    problem = _Problem(
        "matrix",
        lambda A: np.asarray(A, dtype=complex),
        linearize,
        x0,
        real=real,
        scale=max(1.0, float(np.linalg.norm(A0c))),
    )
    return _run(problem, d, initial_cluster, config)
