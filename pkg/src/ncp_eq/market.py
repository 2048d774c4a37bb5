"""Cournot oligopoly with isoelastic demand, posed as an NCP.

Firm ``i`` supplies ``z_i`` units at total cost

    c_i(q) = n_i q + beta_i / (beta_i + 1) * L_i**(1/beta_i) * q**((beta_i + 1)/beta_i)

and the market clears at the inverse-demand price ``P(Q) = scale**(1/e) Q**(-1/e)``
with ``Q = sum(z)``. The Nash-Cournot equilibrium is the NCP with

    f_i(z) = c_i'(z_i) - P(Q) - z_i P'(Q).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

from .linalg import as_vector

# c'' is unbounded at q = 0 when beta > 1; evaluate it no closer than this.
Z_FLOOR = 1e-12


class DomainError(ValueError):
    """Argument lies outside the domain where the model is defined."""


class CostVariant(str, enum.Enum):
    """How ``L_i`` enters the cost curve.

    ``AS_WRITTEN`` uses ``L**(1/beta)``; ``CLASSIC_MURPHY`` uses
    ``L**(-1/beta)``, i.e. marginal cost ``n + (q/L)**(1/beta)``.
    """

    AS_WRITTEN = "as_written"
    CLASSIC_MURPHY = "classic_murphy"


class NcpProblem(Protocol):
    """Anything exposing ``f`` and its Jacobian on ``R^n``."""

    @property
    def dimension(self) -> int: ...

    def f(self, z: np.ndarray) -> np.ndarray: ...

    def jacobian(self, z: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True)
class Firm:
    n: float
    L: float
    beta: float

    def __post_init__(self):
        if not np.isfinite(self.n) or self.n < 0:
            raise ValueError(f"firm n must be finite and >= 0, got {self.n}")
        if not np.isfinite(self.L) or self.L <= 0:
            raise ValueError(f"firm L must be > 0, got {self.L}")
        if not np.isfinite(self.beta) or self.beta <= 0:
            raise ValueError(f"firm beta must be > 0, got {self.beta}")


@dataclass(frozen=True)
class DemandCurve:
    """Isoelastic demand ``Q = scale * P**(-elasticity)``."""

    scale: float = 5000.0
    elasticity: float = 1.1

    def __post_init__(self):
        if not np.isfinite(self.scale) or self.scale <= 0:
            raise ValueError(f"demand scale must be > 0, got {self.scale}")
        if not np.isfinite(self.elasticity) or self.elasticity <= 1:
            raise ValueError(f"demand elasticity must be > 1, got {self.elasticity}")


def _check_total(q_total: float) -> float:
    if not q_total > 0:
        raise DomainError(f"total supply must be positive, got {q_total}")
    return float(q_total)


def inverse_demand(d: DemandCurve, q_total: float) -> float:
    q = _check_total(q_total)
    return (d.scale / q) ** (1.0 / d.elasticity)


def demand_slope(d: DemandCurve, q_total: float) -> float:
    q = _check_total(q_total)
    return -inverse_demand(d, q) / (d.elasticity * q)


def demand_curvature(d: DemandCurve, q_total: float) -> float:
    q = _check_total(q_total)
    a = 1.0 / d.elasticity
    return a * (a + 1.0) * inverse_demand(d, q) / q**2


def _cost_coefficient(firm: Firm, variant: CostVariant) -> float:
    if CostVariant(variant) is CostVariant.AS_WRITTEN:
        return firm.L ** (1.0 / firm.beta)
    return firm.L ** (-1.0 / firm.beta)


def total_cost(firm: Firm, q: float, variant: CostVariant = CostVariant.AS_WRITTEN) -> float:
    if q < 0:
        raise DomainError(f"output must be >= 0, got {q}")
    b = firm.beta
    k = _cost_coefficient(firm, variant)
    return firm.n * q + b / (b + 1.0) * k * q ** ((b + 1.0) / b)


def marginal_cost(firm: Firm, q: float, variant: CostVariant = CostVariant.AS_WRITTEN) -> float:
    if q < 0:
        raise DomainError(f"output must be >= 0, got {q}")
    return firm.n + _cost_coefficient(firm, variant) * q ** (1.0 / firm.beta)


def marginal_cost_slope(firm: Firm, q: float, variant: CostVariant = CostVariant.AS_WRITTEN) -> float:
    if not q > 0:
        raise DomainError(f"marginal cost slope needs output > 0, got {q}")
    a = 1.0 / firm.beta
    return a * _cost_coefficient(firm, variant) * q ** (a - 1.0)


@dataclass(frozen=True)
class MarketModel:
    """Homogeneous-product Cournot market; satisfies :class:`NcpProblem`."""

    firms: tuple[Firm, ...]
    demand: DemandCurve = field(default_factory=DemandCurve)
    cost_variant: CostVariant = CostVariant.AS_WRITTEN

    def __post_init__(self):
        if len(self.firms) < 1:
            raise ValueError("market needs at least one firm")
        object.__setattr__(self, "firms", tuple(self.firms))
        object.__setattr__(self, "cost_variant", CostVariant(self.cost_variant))

    @classmethod
    def from_parameters(
        cls,
        n: Sequence[float],
        L: Sequence[float],
        beta: Sequence[float],
        demand: DemandCurve | None = None,
        cost_variant: CostVariant = CostVariant.AS_WRITTEN,
    ) -> "MarketModel":
        firms = tuple(Firm(float(a), float(b), float(c)) for a, b, c in zip(n, L, beta, strict=True))
        return cls(firms, demand or DemandCurve(), cost_variant)

    @property
    def dimension(self) -> int:
        return len(self.firms)

    def _arrays(self):
        n = np.array([fm.n for fm in self.firms])
        beta = np.array([fm.beta for fm in self.firms])
        k = np.array([_cost_coefficient(fm, self.cost_variant) for fm in self.firms])
        return n, beta, k

    def _checked(self, z) -> np.ndarray:
        z = as_vector(z, "z")
        if z.shape[0] != self.dimension:
            raise DomainError(f"expected {self.dimension} components, got {z.shape[0]}")
        if np.any(z < 0):
            raise DomainError(f"negative supply in z = {z}")
        _check_total(z.sum())
        return z

    def f(self, z) -> np.ndarray:
        return ncp_map(self, z)

    def jacobian(self, z) -> np.ndarray:
        return ncp_jacobian(self, z)

    def price(self, z) -> float:
        return inverse_demand(self.demand, float(np.sum(z)))

    def profit(self, i: int, q: float, z) -> float:
        """Profit of firm ``i`` producing ``q`` while the others keep ``z``."""
        others = float(np.sum(z)) - float(z[i])
        p = inverse_demand(self.demand, q + others)
        return q * p - total_cost(self.firms[i], q, self.cost_variant)


def ncp_map(m: MarketModel, z) -> np.ndarray:
    z = m._checked(z)
    q = z.sum()
    n, beta, k = m._arrays()
    p = inverse_demand(m.demand, q)
    dp = demand_slope(m.demand, q)
    return n + k * z ** (1.0 / beta) - p - z * dp


def ncp_jacobian(m: MarketModel, z) -> np.ndarray:
    z = m._checked(z)
    q = z.sum()
    _, beta, k = m._arrays()
    dp = demand_slope(m.demand, q)
    d2p = demand_curvature(m.demand, q)
    zf = np.maximum(z, Z_FLOOR)
    c2 = k / beta * zf ** (1.0 / beta - 1.0)
    jac = np.repeat((-dp - z * d2p)[:, None], m.dimension, axis=1)
    jac[np.diag_indices_from(jac)] += c2 - dp
    return jac


def kkt_residual(m: MarketModel, z) -> float:
    """Natural residual ``max_i |min(z_i, f_i(z))|`` of the equilibrium conditions."""
    fz = ncp_map(m, z)
    z = np.asarray(z, dtype=float)
    return float(np.max(np.abs(np.minimum(z, fz))))


@dataclass(frozen=True)
class CallableProblem:
    """An :class:`NcpProblem` assembled from plain functions."""

    func: object
    jac: object
    dimension: int

    def f(self, z) -> np.ndarray:
        return np.atleast_1d(np.asarray(self.func(np.asarray(z, dtype=float)), dtype=float))

    def jacobian(self, z) -> np.ndarray:
        return np.atleast_2d(np.asarray(self.jac(np.asarray(z, dtype=float)), dtype=float))
