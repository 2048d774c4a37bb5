"""Dense real linear algebra on numpy arrays.

Vectors are 1-d float arrays and matrices are square 2-d float arrays.
Linear systems are solved by LU factorization with partial pivoting; no
explicit inverse is ever formed.
"""

from __future__ import annotations

import numpy as np

# Pivot threshold relative to the largest entry of the original column.
PIVOT_RTOL = 1e-12


class DimensionError(ValueError):
    """Operands have incompatible shapes."""


class SingularMatrix(ArithmeticError):
    """Raised when elimination meets a pivot below the singularity threshold.

    Attributes:
        pivot_index: zero-based column at which elimination broke down.
    """

    def __init__(self, pivot_index: int, pivot: float = 0.0):
        self.pivot_index = pivot_index
        self.pivot = pivot
        super().__init__(f"singular matrix: pivot {pivot:.3e} at column {pivot_index}")


def as_vector(values, name: str = "vector") -> np.ndarray:
    v = np.array(values, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise DimensionError(f"{name} must be a non-empty 1-d array, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite entries")
    return v


def as_matrix(values, name: str = "matrix") -> np.ndarray:
    a = np.array(values, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise DimensionError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def mat_mul(a, b) -> np.ndarray:
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape != b.shape:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def lu_factor(a) -> tuple[np.ndarray, np.ndarray]:
    """Factor ``P a = L U`` in place with partial (row) pivoting.

    Returns the packed LU matrix (unit lower triangle implied) and the row
    permutation. Raises SingularMatrix when a pivot falls below
    ``PIVOT_RTOL`` times the largest magnitude in its original column.
    """
    lu = as_matrix(a).copy()
    n = lu.shape[0]
    col_scale = np.max(np.abs(lu), axis=0)
    perm = np.arange(n)
    for j in range(n):
        p = j + int(np.argmax(np.abs(lu[j:, j])))
        pivot = lu[p, j]
        if col_scale[j] == 0.0 or abs(pivot) < PIVOT_RTOL * col_scale[j]:
            raise SingularMatrix(j, float(pivot))
        if p != j:
            lu[[j, p]] = lu[[p, j]]
            perm[[j, p]] = perm[[p, j]]
        lu[j + 1 :, j] /= pivot
        lu[j + 1 :, j + 1 :] -= np.outer(lu[j + 1 :, j], lu[j, j + 1 :])
    return lu, perm


def lu_solve(lu: np.ndarray, perm: np.ndarray, b) -> np.ndarray:
    n = lu.shape[0]
    x = np.asarray(b, dtype=float)[perm].copy()
    for i in range(1, n):
        x[i] -= lu[i, :i] @ x[:i]
    for i in range(n - 1, -1, -1):
        x[i] = (x[i] - lu[i, i + 1 :] @ x[i + 1 :]) / lu[i, i]
    return x


def solve_linear(a, b) -> np.ndarray:
    """Solve ``a x = b``.

    Raises:
        DimensionError: ``b`` does not match the order of ``a``.
        SingularMatrix: elimination hit a negligible pivot.
    """
    a = as_matrix(a, "a")
    b = as_vector(b, "b")
    if b.shape[0] != a.shape[0]:
        raise DimensionError(f"rhs of length {b.shape[0]} for a {a.shape} system")
    lu, perm = lu_factor(a)
    return lu_solve(lu, perm, b)


def norm2(v) -> float:
    v = np.asarray(v, dtype=float)
    # scaled to avoid overflow on the large residuals of the cubic reformulation
    m = float(np.max(np.abs(v))) if v.size else 0.0
    if m == 0.0 or not np.isfinite(m):
        return m
    return m * float(np.sqrt(np.sum((v / m) ** 2)))


def norm_inf(v) -> float:
    v = np.asarray(v, dtype=float)
    return float(np.max(np.abs(v))) if v.size else 0.0
