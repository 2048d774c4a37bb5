import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ncp_eq.linalg import DimensionError, SingularMatrix, as_vector, mat_mul, norm2, norm_inf, solve_linear

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False, allow_subnormal=False)


def test_mat_mul_identity_and_square():
    a = np.arange(9.0).reshape(3, 3)
    np.testing.assert_array_equal(mat_mul(np.eye(3), a), a)
    np.testing.assert_array_equal(mat_mul([[1, 2], [3, 4]], np.eye(2)), [[1, 2], [3, 4]])
    np.testing.assert_array_equal(mat_mul([[1, 2], [3, 4]], [[1, 2], [3, 4]]), [[7, 10], [15, 22]])


def test_mat_mul_dimension_mismatch():
    with pytest.raises(DimensionError):
        mat_mul(np.eye(2), np.eye(3))
    with pytest.raises(DimensionError):
        mat_mul(np.ones((2, 3)), np.ones((3, 2)))


def test_solve_linear_examples():
    np.testing.assert_array_equal(solve_linear(np.eye(2), [3, -1]), [3, -1])
    np.testing.assert_allclose(solve_linear([[2, 0], [0, 4]], [2, 8]), [1, 2])


def test_solve_linear_singular_reports_pivot():
    with pytest.raises(SingularMatrix) as info:
        solve_linear(np.zeros((2, 2)), [1, 1])
    assert info.value.pivot_index == 0
    with pytest.raises(SingularMatrix) as info:
        solve_linear([[1, 2], [2, 4]], [1, 1])
    assert info.value.pivot_index == 1


def test_solve_linear_needs_pivoting():
    x = solve_linear([[0, 1], [1, 0]], [2, 3])
    np.testing.assert_array_equal(x, [3, 2])


def test_solve_linear_rejects_bad_shapes_and_nonfinite():
    with pytest.raises(DimensionError):
        solve_linear(np.eye(2), [1, 2, 3])
    with pytest.raises(ValueError):
        as_vector([1.0, np.nan])


def test_norms():
    assert norm2([0, 0, 0]) == 0
    assert norm2([3, 4]) == 5
    assert norm2([1, 1, 1, 1]) == 2
    assert norm_inf([0, 0]) == 0
    assert norm_inf([-3, 2]) == 3
    assert norm_inf([1, -5, 4]) == 5


def test_norm2_survives_huge_entries():
    assert norm2([3e200, 4e200]) == pytest.approx(5e200)


@settings(max_examples=200)
@given(arrays(float, (5, 5), elements=finite), arrays(float, 5, elements=finite))
def test_solve_residual_diagonally_dominant(a, b):
    a = a + np.diag(np.sum(np.abs(a), axis=1) + 1.0)
    x = solve_linear(a, b)
    assert norm_inf(a @ x - b) <= 1e-8 * norm_inf(b)


@settings(max_examples=100)
@given(*(arrays(float, (4, 4), elements=st.floats(-10, 10)) for _ in range(3)))
def test_mat_mul_associative(a, b, c):
    left = mat_mul(mat_mul(a, b), c)
    right = mat_mul(a, mat_mul(b, c))
    scale = np.max(np.abs(a)) * np.max(np.abs(b)) * np.max(np.abs(c)) * 16 + 1e-300
    assert np.max(np.abs(left - right)) <= 1e-9 * scale


@given(arrays(float, st.integers(1, 10), elements=finite))
def test_norm2_squared_is_dot(v):
    assert norm2(v) ** 2 == pytest.approx(float(v @ v), rel=1e-12, abs=1e-300)


def test_solve_meets_contract_residual_bound():
    rng = np.random.default_rng(11)
    for n in (1, 2, 5, 10, 30):
        for _ in range(20):
            a = rng.uniform(-10, 10, (n, n)) + n * np.eye(n)
            b = rng.uniform(-100, 100, n)
            x = solve_linear(a, b)
            assert norm_inf(a @ x - b) <= 1e-10 * (1 + norm_inf(b))
