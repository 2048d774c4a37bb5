"""Four-stage regularized Newton iteration for square systems ``psi(z) = 0``.

Each pass computes

    y = z - 1/2 [J(z) + diag(t psi(z))]^-1 psi(z)
    x = z - 1/2 [J(z)^2 + J(y)^2 + diag(lam psi(z)^2)]^-1 [J(z) + J(y)] psi(z)
    w = x - [J(x)^2 + J(y)^2 + diag(mu psi(x)^2)]^-1 [J(x) + J(y)] psi(x)
    z+ = w - [J(w) + diag(eta psi(w)^2)]^-1 psi(w)

where ``J^2`` is the matrix product ``J @ J`` and every regularizer takes the
sign of the matching diagonal Jacobian entry. The solver works with any
object exposing ``residual(z)``, ``jacobian(z)`` and ``dimension`` (for
example :class:`ncp_eq.reform.PsiSystem`).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .linalg import SingularMatrix, as_vector, norm2, solve_linear
from .market import DomainError

REPAIR_FACTOR = 1e3
REFERENCE_TOL = 1e-13


class Method(str, enum.Enum):
    MODIFIED_NEWTON = "modified"
    CLASSICAL_NEWTON = "classical"


class Status(str, enum.Enum):
    CONVERGED = "converged"
    MAX_ITERATIONS = "max_iterations"
    SINGULAR_FAILURE = "singular_failure"
    DOMAIN_FAILURE = "domain_failure"


class InsufficientData(ValueError):
    """Too few usable iterates to estimate a convergence order."""


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-7
    max_iter: int = 50
    reg_t: float = 1e-3
    reg_lambda: float = 1e-3
    reg_mu: float = 1e-3
    reg_eta: float = 1e-3
    method: Method = Method.MODIFIED_NEWTON

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if not (self.tol > 0 and math.isfinite(self.tol)):
            raise ValueError(f"tol must be a positive number, got {self.tol}")
        if isinstance(self.max_iter, bool) or int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError(f"max_iter must be an integer >= 1, got {self.max_iter}")
        for name in ("reg_t", "reg_lambda", "reg_mu", "reg_eta"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be a positive number, got {v}")

    def scaled(self, factor: float) -> "SolverConfig":
        return replace(
            self,
            reg_t=self.reg_t * factor,
            reg_lambda=self.reg_lambda * factor,
            reg_mu=self.reg_mu * factor,
            reg_eta=self.reg_eta * factor,
        )


@dataclass
class IterationRecord:
    """One pass of the iteration, started from ``z_k``.

    ``residual_norm`` is the Euclidean norm of ``psi(z_k)``. The stage
    iterates and the regularizer bookkeeping are only filled in for the
    modified method. ``regularizers`` holds the realized diagonal added at
    each stage (``t psi``, ``lam psi^2``, ``mu psi^2``, ``eta psi^2``) and
    ``jacobian_diagonals`` the Jacobian diagonal whose sign it must match.
    """

    k: int
    z_k: np.ndarray
    residual_norm: float
    z_next: np.ndarray
    y_k: np.ndarray | None = None
    x_k: np.ndarray | None = None
    w_k: np.ndarray | None = None
    singular_repair_count: int = 0
    regularizers: dict[str, np.ndarray] = field(default_factory=dict)
    jacobian_diagonals: dict[str, np.ndarray] = field(default_factory=dict)


@dataclass
class SolveResult:
    status: Status
    solution: np.ndarray
    trace: list[IterationRecord]
    final_residual: float
    message: str = ""

    @property
    def iterations(self) -> int:
        return len(self.trace)

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED

    def iterates(self) -> list[np.ndarray]:
        return iterates_from_trace(self.trace)


def _evaluate(sys, z) -> np.ndarray:
    r = np.asarray(sys.residual(z), dtype=float)
    if not np.all(np.isfinite(r)):
        raise DomainError(f"non-finite residual at z = {z}")
    return r


def _jacobian(sys, z) -> np.ndarray:
    j = np.asarray(sys.jacobian(z), dtype=float)
    if not np.all(np.isfinite(j)):
        raise DomainError(f"non-finite Jacobian at z = {z}")
    return j


def _diag_sign(jac: np.ndarray) -> np.ndarray:
    # a zero diagonal entry places no constraint on the sign
    return np.where(np.diag(jac) >= 0, 1.0, -1.0)


def _four_stage(sys, z: np.ndarray, cfg: SolverConfig):
    pz = _evaluate(sys, z)
    jz = _jacobian(sys, z)
    sz = _diag_sign(jz)

    t = np.where(pz != 0, sz * np.sign(pz), 1.0) * cfg.reg_t
    reg_y = t * pz
    y = z - 0.5 * solve_linear(jz + np.diag(reg_y), pz)

    jy = _jacobian(sys, y)
    reg_x = sz * cfg.reg_lambda * pz**2
    x = z - 0.5 * solve_linear(jz @ jz + jy @ jy + np.diag(reg_x), (jz + jy) @ pz)

    px = _evaluate(sys, x)
    jx = _jacobian(sys, x)
    reg_w = _diag_sign(jx) * cfg.reg_mu * px**2
    w = x - solve_linear(jx @ jx + jy @ jy + np.diag(reg_w), (jx + jy) @ px)

    pw = _evaluate(sys, w)
    jw = _jacobian(sys, w)
    reg_z = _diag_sign(jw) * cfg.reg_eta * pw**2
    z_next = w - solve_linear(jw + np.diag(reg_z), pw)
    if not np.all(np.isfinite(z_next)):
        raise DomainError("iteration produced non-finite values")

    stages = dict(y_k=y, x_k=x, w_k=w)
    regs = {"t": reg_y, "lambda": reg_x, "mu": reg_w, "eta": reg_z}
    diags = {"t": np.diag(jz).copy(), "lambda": np.diag(jz).copy(), "mu": np.diag(jx).copy(), "eta": np.diag(jw).copy()}
    return z_next, pz, stages, regs, diags


def modified_newton_step(sys, z_k, cfg: SolverConfig | None = None, k: int = 0):
    """One full four-stage pass from ``z_k``.

    A singular stage matrix triggers a single retry with every regularizer
    magnitude multiplied by ``REPAIR_FACTOR``; a second failure re-raises
    :class:`SingularMatrix`.

    Returns:
        ``(z_next, record)``
    """
    cfg = cfg or SolverConfig()
    z = as_vector(z_k, "z_k")
    repairs = 0
    try:
        z_next, pz, stages, regs, diags = _four_stage(sys, z, cfg)
    except SingularMatrix:
        repairs = 1
        z_next, pz, stages, regs, diags = _four_stage(sys, z, cfg.scaled(REPAIR_FACTOR))
    record = IterationRecord(
        k=k,
        z_k=z,
        residual_norm=norm2(pz),
        z_next=z_next,
        singular_repair_count=repairs,
        regularizers=regs,
        jacobian_diagonals=diags,
        **stages,
    )
    return z_next, record


def classical_newton_step(sys, z_k) -> np.ndarray:
    z = as_vector(z_k, "z_k")
    return z - solve_linear(_jacobian(sys, z), _evaluate(sys, z))


def _classical_record(sys, z: np.ndarray, k: int):
    pz = _evaluate(sys, z)
    z_next = z - solve_linear(_jacobian(sys, z), pz)
    if not np.all(np.isfinite(z_next)):
        raise DomainError("iteration produced non-finite values")
    return z_next, IterationRecord(k=k, z_k=z, residual_norm=norm2(pz), z_next=z_next)


def solve(sys, z0, cfg: SolverConfig | None = None) -> SolveResult:
    """Iterate until ``||psi(z)||_2 < cfg.tol`` or ``cfg.max_iter`` passes."""
    cfg = cfg or SolverConfig()
    z = as_vector(z0, "z0")
    trace: list[IterationRecord] = []
    try:
        n1 = norm2(_evaluate(sys, z))
    except DomainError as exc:
        return SolveResult(Status.DOMAIN_FAILURE, z, trace, math.inf, str(exc))
    if n1 < cfg.tol:
        return SolveResult(Status.CONVERGED, z, trace, n1)

    for k in range(cfg.max_iter):
        try:
            if cfg.method is Method.MODIFIED_NEWTON:
                z_next, record = modified_newton_step(sys, z, cfg, k)
            else:
                z_next, record = _classical_record(sys, z, k)
            n1_next = norm2(_evaluate(sys, z_next))
        except SingularMatrix as exc:
            return SolveResult(Status.SINGULAR_FAILURE, z, trace, n1, f"pass {k}: {exc}")
        except DomainError as exc:
            return SolveResult(Status.DOMAIN_FAILURE, z, trace, n1, f"pass {k}: {exc}")
        trace.append(record)
        z, n1 = z_next, n1_next
        if n1 < cfg.tol:
            return SolveResult(Status.CONVERGED, z, trace, n1)
    return SolveResult(Status.MAX_ITERATIONS, z, trace, n1)


def reference_solution(sys, z0, cfg: SolverConfig | None = None, tol: float = REFERENCE_TOL) -> np.ndarray:
    """High-accuracy root used as the error reference for order estimates."""
    cfg = cfg or SolverConfig()
    result = solve(sys, z0, replace(cfg, tol=tol, max_iter=max(cfg.max_iter, 100)))
    return result.solution


def iterates_from_trace(trace: Sequence[IterationRecord]) -> list[np.ndarray]:
    if not trace:
        return []
    return [r.z_k for r in trace] + [trace[-1].z_next]


@dataclass
class OrderEstimate:
    """Computational order of convergence along an iterate sequence.

    ``per_step_orders[j]`` uses errors ``j, j+1, j+2``; ``nan`` marks
    triples that touch an error at the rounding floor.
    """

    per_step_orders: list[float]
    reference_solution: np.ndarray
    error_norms: list[float]

    @property
    def defined_orders(self) -> list[float]:
        return [r for r in self.per_step_orders if math.isfinite(r)]

    @property
    def last_order(self) -> float:
        return self.defined_orders[-1]

    @property
    def max_order(self) -> float:
        return max(self.defined_orders)


def order_from_errors(errors: Sequence[float], floor: float = 0.0) -> list[float]:
    orders = []
    for j in range(len(errors) - 2):
        e0, e1, e2 = errors[j], errors[j + 1], errors[j + 2]
        if min(e0, e1, e2) <= floor or e1 == e0:
            orders.append(math.nan)
            continue
        orders.append(math.log(e2 / e1) / math.log(e1 / e0))
    return orders


def estimate_order(trace, reference) -> OrderEstimate:
    """Estimate ``rho_k = ln(e_{k+1}/e_k) / ln(e_k/e_{k-1})`` against ``reference``.

    ``trace`` is a list of :class:`IterationRecord` or a plain list of
    iterates. Errors at or below ``100 * eps * max(1, ||reference||)`` are
    treated as exhausted precision.
    """
    ref = as_vector(reference, "reference")
    if trace and isinstance(trace[0], IterationRecord):
        iterates = iterates_from_trace(trace)
    else:
        iterates = [np.asarray(v, dtype=float) for v in trace]
    errors = [norm2(np.asarray(v, dtype=float) - ref) for v in iterates]
    floor = 100.0 * np.finfo(float).eps * max(1.0, norm2(ref))
    usable = sum(e > floor for e in errors)
    if usable < 3:
        raise InsufficientData(f"need at least 3 iterates above the precision floor, have {usable}")
    orders = order_from_errors(errors, floor)
    if not any(math.isfinite(r) for r in orders):
        raise InsufficientData("no three consecutive iterates above the precision floor")
    return OrderEstimate(orders, ref, errors)
