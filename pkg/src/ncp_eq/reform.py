"""Equation-system reformulation of the NCP.

For any strictly increasing ``phi`` with ``phi(0) = 0``, ``z`` solves the NCP
for ``f`` exactly when every component of

    psi_i(z) = phi((f_i - z_i)**2) - phi(f_i |f_i|) - phi(z_i |z_i|)

vanishes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .linalg import as_vector, norm_inf
from .market import NcpProblem

FORWARD_COMPLEMENTARITY_TOL = 1e-9
PSI_ZERO_TOL = 1e-8
BACKWARD_TOL = 1e-6


class Phi(str, enum.Enum):
    CUBE = "cube"
    IDENTITY = "identity"

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        return x**3 if self is Phi.CUBE else x

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        return 3.0 * x**2 if self is Phi.CUBE else np.ones_like(x)


@dataclass(frozen=True)
class PsiSystem:
    """The square system ``psi(z) = 0`` attached to an NCP."""

    problem: NcpProblem
    phi: Phi = Phi.CUBE

    def __post_init__(self):
        object.__setattr__(self, "phi", Phi(self.phi))

    @property
    def dimension(self) -> int:
        return self.problem.dimension

    def residual(self, z) -> np.ndarray:
        return psi(self, z)

    def jacobian(self, z) -> np.ndarray:
        return psi_jacobian(self, z)


def psi_from_values(phi: Phi, fz, z) -> np.ndarray:
    fz = np.asarray(fz, dtype=float)
    z = np.asarray(z, dtype=float)
    return phi.evaluate((fz - z) ** 2) - phi.evaluate(fz * np.abs(fz)) - phi.evaluate(z * np.abs(z))


def psi(sys: PsiSystem, z) -> np.ndarray:
    z = as_vector(z, "z")
    return psi_from_values(sys.phi, sys.problem.f(z), z)


def psi_jacobian(sys: PsiSystem, z) -> np.ndarray:
    """Analytic Jacobian of ``psi``, with the convention ``sgn(0) = 0``."""
    z = as_vector(z, "z")
    fz = sys.problem.f(z)
    jf = sys.problem.jacobian(z)
    dphi = sys.phi.derivative
    d = fz - z
    a = dphi(d**2) * 2.0 * d
    b = dphi(fz * np.abs(fz)) * 2.0 * fz * np.sign(fz)
    c = dphi(z * np.abs(z)) * 2.0 * z * np.sign(z)
    eye = np.eye(z.shape[0])
    return a[:, None] * (jf - eye) - b[:, None] * jf - np.diag(c)


def is_complementary(fz, z, tol: float = FORWARD_COMPLEMENTARITY_TOL) -> bool:
    fz = np.asarray(fz, dtype=float)
    z = np.asarray(z, dtype=float)
    return bool(np.all(z >= -tol) and np.all(fz >= -tol) and np.all(np.abs(z * fz) <= tol))


def check_equivalence_forward(
    sys: PsiSystem,
    z,
    tol: float = FORWARD_COMPLEMENTARITY_TOL,
    psi_tol: float = PSI_ZERO_TOL,
) -> bool:
    """Complementary ``z`` must be a root of ``psi``; vacuously true otherwise."""
    z = as_vector(z, "z")
    fz = sys.problem.f(z)
    if not is_complementary(fz, z, tol):
        return True
    return norm_inf(psi_from_values(sys.phi, fz, z)) <= psi_tol


def check_equivalence_backward(
    sys: PsiSystem,
    z,
    psi_tol: float = PSI_ZERO_TOL,
    tol: float = BACKWARD_TOL,
) -> bool:
    """A root of ``psi`` must be complementary; vacuously true otherwise."""
    z = as_vector(z, "z")
    fz = sys.problem.f(z)
    if norm_inf(psi_from_values(sys.phi, fz, z)) > psi_tol:
        return True
    return is_complementary(fz, z, tol)
