import numpy as np
import pytest
import sympy

from nearjordan.families import (
    AffineFamily,
    MatrixFamily,
    coerce_parameters,
    example2_perturbation,
    family_example1,
    family_swallow_tail,
    family_versal_form,
    finite_difference_derivative,
    matrix_example2,
    matrix_frank,
)
from nearjordan.versal import versal_values
from oracles import exact_determinant, frank_entries


def E(m, i, j):
    M = np.zeros((m, m))
    M[i, j] = 1.0
    return M


def test_swallow_tail_origin_is_single_jordan_block():
    A = family_swallow_tail().evaluate([0, 0, 0])
    assert np.array_equal(A, np.diag(np.ones(3), 1))
    assert np.linalg.matrix_rank(A) == 3
    assert not np.any(np.linalg.matrix_power(A, 4))


def test_swallow_tail_derivatives_are_unit_entries():
    fam = family_swallow_tail()
    D = fam.derivatives([0.3, -0.2, 0.1])
    for j in range(3):
        assert np.array_equal(D[j], E(4, j + 1, 0))


def test_swallow_tail_characteristic_polynomial():
    p1, p2, p3, lam = sympy.symbols("p1 p2 p3 lam")
    A = sympy.Matrix([[0, 1, 0, 0], [p1, 0, 1, 0], [p2, 0, 0, 1], [p3, 0, 0, 0]])
    poly = sympy.expand((lam * sympy.eye(4) - A).det())
    assert sympy.simplify(poly - (lam**4 - p1 * lam**2 - p2 * lam - p3)) == 0
    # numeric family agrees with the symbolic matrix
    vals = {p1: 0.3, p2: -0.7, p3: 1.1}
    num = np.array(A.subs(vals).evalf(), dtype=complex)
    assert np.allclose(family_swallow_tail().evaluate([0.3, -0.7, 1.1]), num)


def test_example1_stratum_point_eigenvalues():
    A = family_example1().evaluate([0, 9])
    w = np.sort_complex(np.linalg.eigvals(A))
    assert np.allclose(w, [-2, -2, 7], atol=1e-6)
    # (mu - 3)^2 (mu + 6) with mu = 1 - lambda
    assert np.allclose(np.poly(A), np.poly([-2, -2, 7]), atol=1e-12)


def test_example1_start_point_eigenvalues():
    w = np.linalg.eigvals(family_example1().evaluate([-0.03, 8.99]))
    w = w[np.argsort(w.real)]
    assert np.allclose(np.round(w.real, 3), [-1.995, -1.995, 6.990])
    assert np.allclose(np.round(np.abs(w.imag), 3), [0.183, 0.183, 0.0])


def test_example1_derivative_p2():
    assert np.array_equal(family_example1().derivative([0.1, 0.2], 1), E(3, 1, 2))


@pytest.mark.parametrize("d", [1, 2, 3, 5])
def test_versal_form_values_equal_parameters(d):
    rng = np.random.default_rng(d)
    p = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    fam = family_versal_form(d)
    assert np.allclose(versal_values(fam.evaluate(p)).q, p, atol=1e-12)


def test_versal_form_jordan_block():
    A = family_versal_form(4).evaluate([2.5, 0, 0, 0])
    assert np.array_equal(A, 2.5 * np.eye(4) + np.diag(np.ones(3), 1))


def test_example2_structure():
    A1 = matrix_example2(0.0, 1.5e-9)
    assert np.array_equal(A1, [[0, 1, 0], [0, 0, 1.5e-9], [0, 0, 0]])
    assert np.linalg.norm(2.2e-15 * example2_perturbation()) == pytest.approx(3.62e-14, rel=2e-3)
    assert np.array_equal(matrix_example2(), A1 + 2.2e-15 * example2_perturbation())


def test_frank_entries():
    F = matrix_frank(12)
    assert (F[0, 0], F[0, 1], F[1, 0], F[2, 0]) == (12, 11, 11, 0)
    assert not np.any(np.tril(F, -2))
    assert np.array_equal(F, frank_entries(12))


def test_frank_determinant_is_one():
    assert exact_determinant(matrix_frank(12)) == 1


def test_finite_difference_exact_for_affine_families():
    rng = np.random.default_rng(0)
    for fam in (family_swallow_tail(), family_example1()):
        p = rng.standard_normal(fam.n)
        for j in range(fam.n):
            fd = finite_difference_derivative(fam, p, j)
            assert np.allclose(fd, fam.derivative(p, j), atol=1e-9, rtol=0)


def test_finite_difference_quadratic():
    fam = MatrixFamily(2, 1, lambda p: p[0] ** 2 * E(2, 0, 0), domain="real")
    fd = finite_difference_derivative(fam, [3.0], 0)
    assert np.allclose(fd, 6 * E(2, 0, 0), atol=1e-7)
    # no analytic derivative: the family falls back to the same difference
    assert not fam.analytic
    assert np.allclose(fam.derivative([3.0], 0), fd)


def test_finite_difference_step_sweep_is_u_shaped():
    fam = MatrixFamily(1, 1, lambda p: np.array([[np.exp(p[0])]]), domain="real")
    steps = [1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12]
    err = [abs(finite_difference_derivative(fam, [1.0], 0, h)[0, 0] - np.e) for h in steps]
    k = int(np.argmin(err))
    assert 0 < k < len(steps) - 1
    assert err[0] > err[k] and err[-1] > err[k]


def test_finite_difference_rejects_bad_step():
    with pytest.raises(ValueError):
        finite_difference_derivative(family_example1(), [0, 0], 0, step=0.0)


@pytest.mark.parametrize("make", [family_swallow_tail, family_example1, lambda: family_versal_form(3)])
def test_fd_matches_analytic_on_builtin_families(make):
    fam = make()
    rng = np.random.default_rng(7)
    for _ in range(10):
        p = rng.standard_normal(fam.n)
        for j in range(fam.n):
            a = fam.derivative(p, j)
            fd = finite_difference_derivative(fam, p, j)
            assert np.linalg.norm(fd - a) <= 1e-5 * np.linalg.norm(a)


def test_real_family_accepts_complex_points():
    fam = family_example1()
    A = fam.evaluate([0.5j, 9.0])
    assert A[1, 0] == 0.5j
    assert fam.evaluate([1 + 0j, 2]).dtype == complex


def test_parameter_count_checked():
    with pytest.raises(ValueError):
        family_example1().evaluate([1.0])
    with pytest.raises(ValueError):
        coerce_parameters(family_swallow_tail(), [1.0, 2.0])
    with pytest.raises(IndexError):
        family_example1().derivative([0, 0], 2)


def test_affine_family_validation():
    with pytest.raises(ValueError):
        AffineFamily(np.zeros((2, 3)), [np.zeros((2, 3))])
    with pytest.raises(ValueError):
        AffineFamily(np.zeros((2, 2)), [np.zeros((3, 3))])
    with pytest.raises(ValueError):
        MatrixFamily(2, 1, lambda p: np.eye(2), domain="quaternion")
    with pytest.raises(ValueError):
        matrix_frank(0)
    with pytest.raises(ValueError):
        family_versal_form(0)
