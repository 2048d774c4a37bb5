"""Randomized self-checks of the market Jacobian and the psi reformulation.

Backs the ``check`` subcommand. Complementary points are built
constructively (choose ``z`` first, then the linear cost coefficients that
make it an equilibrium), so no solver is involved in producing them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .market import CostVariant, DemandCurve, Firm, MarketModel, ncp_jacobian, ncp_map
from .reform import Phi, PsiSystem, check_equivalence_forward, psi, psi_jacobian

JACOBIAN_RTOL = 1e-5


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tol: float
    passed: bool
    detail: str = ""


class CorruptedJacobian:
    """Negative control: a PsiSystem whose Jacobian is off by a relative factor."""

    def __init__(self, sys: PsiSystem, factor: float = 1e-3):
        self.sys = sys
        self.factor = factor

    @property
    def dimension(self) -> int:
        return self.sys.dimension

    def residual(self, z):
        return self.sys.residual(z)

    def jacobian(self, z):
        return self.sys.jacobian(z) * (1.0 + self.factor)


def central_difference_jacobian(func, z, rel_step: float = 1e-6) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    cols = []
    for j in range(z.shape[0]):
        h = rel_step * max(abs(z[j]), 1.0)
        zp, zm = z.copy(), z.copy()
        zp[j] += h
        zm[j] -= h
        cols.append((np.asarray(func(zp)) - np.asarray(func(zm))) / (2.0 * h))
    return np.column_stack(cols)


def jacobian_rel_error(analytic, numeric) -> float:
    """Largest entry error, each row measured against its own magnitude."""
    analytic = np.asarray(analytic, dtype=float)
    numeric = np.asarray(numeric, dtype=float)
    scale = np.max(np.abs(numeric), axis=1, keepdims=True)
    scale = np.where(scale > 0, scale, 1.0)
    return float(np.max(np.abs(analytic - numeric) / scale))


def random_market(rng: np.random.Generator, n_firms: int, variant=None) -> MarketModel:
    variant = variant or list(CostVariant)[int(rng.integers(len(CostVariant)))]
    firms = tuple(
        Firm(float(rng.uniform(0, 10)), float(rng.uniform(1, 10)), float(rng.uniform(0.5, 1.5)))
        for _ in range(n_firms)
    )
    demand = DemandCurve(float(rng.uniform(100, 5000)), float(rng.uniform(1.05, 3.0)))
    return MarketModel(firms, demand, variant)


def single_firm_equilibrium(m: MarketModel) -> float:
    """Root of the scalar equilibrium condition by bisection.

    For one firm ``f(z) = n + c(z) - P(z) (1 - 1/e)`` runs from ``-inf`` at
    ``z -> 0`` to ``+inf``, monotonically, so the root is bracketed and unique.
    """
    if m.dimension != 1:
        raise ValueError("bisection oracle needs a single-firm market")
    def g(q):
        return float(ncp_map(m, [q])[0])

    lo = hi = 1.0
    while g(hi) <= 0:
        hi *= 2.0
    while g(lo) >= 0:
        lo *= 0.5
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if g(mid) < 0:
            lo = mid
        else:
            hi = mid
    return lo if abs(g(lo)) <= abs(g(hi)) else hi


def constructed_complementary_point(
    rng: np.random.Generator, n_firms: int, variant=None, max_tries: int = 1000
) -> tuple[MarketModel, np.ndarray]:
    """A random market together with one of its exact equilibria.

    Single-firm markets are solved by bisection. Larger markets fix ``z``
    first (some components zero) and then pick each ``n_i`` so that
    ``f_i = 0`` for active firms and ``f_i >= 0`` for idle ones.
    """
    if n_firms == 1:
        m = random_market(rng, 1, variant)
        m = MarketModel(m.firms, DemandCurve(float(rng.uniform(1, 20)), m.demand.elasticity), m.cost_variant)
        return m, np.array([single_firm_equilibrium(m)])

    for _ in range(max_tries):
        base = random_market(rng, n_firms, variant)
        demand = DemandCurve(float(rng.uniform(1, 50)), base.demand.elasticity)
        active = rng.random(n_firms) < 0.7
        if not active.any():
            active[rng.integers(n_firms)] = True
        z = np.where(active, rng.uniform(0.05, 2.0, n_firms), 0.0)
        zero_cost = MarketModel(tuple(Firm(0.0, f.L, f.beta) for f in base.firms), demand, base.cost_variant)
        g = ncp_map(zero_cost, z)
        if np.any(g[active] > 0):
            continue
        slack = np.where(rng.random(n_firms) < 0.2, 0.0, rng.uniform(0, 1, n_firms))
        n = np.where(active, -g, -g + slack)
        firms = tuple(Firm(float(ni), f.L, f.beta) for ni, f in zip(n, base.firms))
        return MarketModel(firms, demand, base.cost_variant), z
    raise RuntimeError("could not construct a complementary point")


def violating_point(rng: np.random.Generator, n_firms: int, floor: float = 1e-3, max_tries: int = 10000):
    """Random ``(market, z, i)`` with ``z_i > floor`` and ``f_i(z) > floor``."""
    for _ in range(max_tries):
        m = random_market(rng, n_firms)
        z = rng.uniform(floor, 10.0, n_firms)
        fz = ncp_map(m, z)
        bad = np.flatnonzero((z > floor) & (fz > floor))
        if bad.size:
            return m, z, int(rng.choice(bad))
    raise RuntimeError("rejection sampling found no violating point")


def run_checks(
    market: MarketModel,
    phi: Phi,
    rng: np.random.Generator | None = None,
    n_points: int = 20,
    n_equivalence: int = 200,
    corrupt: bool = False,
) -> list[CheckResult]:
    rng = rng if rng is not None else np.random.default_rng(0)
    sys = PsiSystem(market, phi)
    target = CorruptedJacobian(sys) if corrupt else sys
    n = market.dimension
    points = [rng.uniform(1.0, 100.0, n) for _ in range(n_points)]
    results = []

    err = max(jacobian_rel_error(ncp_jacobian(market, z), central_difference_jacobian(market.f, z)) for z in points)
    results.append(CheckResult("ncp_jacobian vs central differences", err, JACOBIAN_RTOL, err <= JACOBIAN_RTOL))

    err = max(jacobian_rel_error(target.jacobian(z), central_difference_jacobian(sys.residual, z)) for z in points)
    results.append(CheckResult("psi_jacobian vs central differences", err, JACOBIAN_RTOL, err <= JACOBIAN_RTOL))

    own = min(float(np.min(np.diag(ncp_jacobian(market, z)))) for z in points)
    results.append(CheckResult("min own-price slope df_i/dz_i", own, 0.0, own > 0))

    failures = 0
    worst = 0.0
    for _ in range(n_equivalence):
        m, z = constructed_complementary_point(rng, n, market.cost_variant)
        s = PsiSystem(m, phi)
        worst = max(worst, float(np.max(np.abs(psi(s, z)))))
        failures += not check_equivalence_forward(s, z)
    results.append(
        CheckResult("max |psi| at constructed complementary points", worst, 1e-8, failures == 0, f"{failures} failures")
    )

    zero_hits = 0
    for _ in range(n_equivalence):
        m, z, i = violating_point(rng, n)
        zero_hits += psi(PsiSystem(m, phi), z)[i] == 0.0
    results.append(
        CheckResult("psi_i = 0 at non-complementary points", float(zero_hits), 0.0, bool(zero_hits == 0))
    )
    return results
