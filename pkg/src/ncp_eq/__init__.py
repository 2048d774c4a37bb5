"""Nonlinear complementarity solver with a Cournot oligopoly model.

The NCP ``z >= 0, f(z) >= 0, z.f(z) = 0`` is rewritten as a square system
``psi(z) = 0`` and solved with a four-stage regularized Newton iteration.
"""

from .linalg import DimensionError, SingularMatrix, mat_mul, norm2, norm_inf, solve_linear
from .market import (
    CostVariant,
    DemandCurve,
    DomainError,
    Firm,
    MarketModel,
    kkt_residual,
)
from .reform import Phi, PsiSystem, psi, psi_jacobian
from .solver import (
    InsufficientData,
    Method,
    OrderEstimate,
    SolveResult,
    SolverConfig,
    Status,
    estimate_order,
    solve,
)

__all__ = [
    "CostVariant",
    "DemandCurve",
    "DimensionError",
    "DomainError",
    "Firm",
    "InsufficientData",
    "MarketModel",
    "Method",
    "OrderEstimate",
    "Phi",
    "PsiSystem",
    "SingularMatrix",
    "SolveResult",
    "SolverConfig",
    "Status",
    "estimate_order",
    "kkt_residual",
    "mat_mul",
    "norm2",
    "norm_inf",
    "psi",
    "psi_jacobian",
    "solve",
    "solve_linear",
]
