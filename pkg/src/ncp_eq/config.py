"""Run configuration documents (JSON) for the command-line tool."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path

import numpy as np

from .market import CostVariant, DemandCurve, Firm, MarketModel
from .reform import Phi
from .solver import Method, SolverConfig

BUNDLED = ("murphy5.json", "murphy5_beta_corrected.json", "scalar_quad.json", "smooth2d.json")

_TOP_KEYS = {"description", "firms", "demand", "solver", "phi", "cost_variant", "initial_point", "output"}
_FIRM_KEYS = {"n", "L", "beta"}
_DEMAND_KEYS = {"scale", "elasticity"}
_SOLVER_KEYS = {f.name for f in fields(SolverConfig)}
_OUTPUT_KEYS = {"trace", "json"}


class ConfigError(ValueError):
    """Malformed or invalid configuration; the message names the location."""


@dataclass(frozen=True)
class RunConfig:
    market: MarketModel
    solver: SolverConfig
    phi: Phi
    initial_point: tuple[float, ...]
    trace_path: str | None = None
    json_path: str | None = None
    description: str = ""

    @property
    def z0(self) -> np.ndarray:
        return np.array(self.initial_point, dtype=float)


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{where}: must be finite")
    return float(value)


def _object(value, where: str, allowed: set[str]) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(f"{where}: expected an object")
    unknown = sorted(set(value) - allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(unknown)}")
    return value


def _enum(cls, value, where: str):
    try:
        return cls(value)
    except ValueError:
        choices = ", ".join(m.value for m in cls)
        raise ConfigError(f"{where}: expected one of {choices}, got {value!r}") from None


def from_dict(doc: dict) -> RunConfig:
    doc = _object(doc, "config", _TOP_KEYS)
    for key in ("firms", "demand", "initial_point"):
        if key not in doc:
            raise ConfigError(f"config: missing required key {key!r}")

    raw_firms = doc["firms"]
    if not isinstance(raw_firms, list) or not raw_firms:
        raise ConfigError("firms: expected a non-empty array")
    firms = []
    for i, raw in enumerate(raw_firms):
        where = f"firms[{i}]"
        raw = _object(raw, where, _FIRM_KEYS)
        missing = sorted(_FIRM_KEYS - set(raw))
        if missing:
            raise ConfigError(f"{where}: missing key(s) {', '.join(missing)}")
        vals = {k: _number(raw[k], f"{where}.{k}") for k in ("n", "L", "beta")}
        try:
            firms.append(Firm(**vals))
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from None

    raw_demand = _object(doc["demand"], "demand", _DEMAND_KEYS)
    try:
        demand = DemandCurve(**{k: _number(v, f"demand.{k}") for k, v in raw_demand.items()})
    except ValueError as exc:
        raise ConfigError(f"demand: {exc}") from None

    variant = _enum(CostVariant, doc.get("cost_variant", CostVariant.AS_WRITTEN.value), "cost_variant")
    phi = _enum(Phi, doc.get("phi", Phi.CUBE.value), "phi")

    raw_solver = _object(doc.get("solver", {}), "solver", _SOLVER_KEYS)
    solver_kw = {}
    for key, value in raw_solver.items():
        where = f"solver.{key}"
        if key == "method":
            solver_kw[key] = _enum(Method, value, where)
        elif key == "max_iter":
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"{where}: expected an integer, got {value!r}")
            solver_kw[key] = value
        else:
            solver_kw[key] = _number(value, where)
    solver = make_solver_config(**solver_kw)

    raw_point = doc["initial_point"]
    if not isinstance(raw_point, list):
        raise ConfigError("initial_point: expected an array")
    point = tuple(_number(v, f"initial_point[{i}]") for i, v in enumerate(raw_point))
    if len(point) != len(firms):
        raise ConfigError(f"initial_point: has {len(point)} entries for {len(firms)} firms")
    if any(v < 0 for v in point) or sum(point) <= 0:
        raise ConfigError("initial_point: entries must be >= 0 with a positive total")

    output = _object(doc.get("output", {}), "output", _OUTPUT_KEYS)
    for key, value in output.items():
        if value is not None and not isinstance(value, str):
            raise ConfigError(f"output.{key}: expected a path string")
    description = doc.get("description", "")
    if not isinstance(description, str):
        raise ConfigError("description: expected a string")

    return RunConfig(
        market=MarketModel(tuple(firms), demand, variant),
        solver=solver,
        phi=phi,
        initial_point=point,
        trace_path=output.get("trace"),
        json_path=output.get("json"),
        description=description,
    )


def make_solver_config(**kw) -> SolverConfig:
    try:
        return SolverConfig(**kw)
    except ValueError as exc:
        raise ConfigError(f"solver: {exc}") from None


def parse_config(text: str) -> RunConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return from_dict(doc)


def to_dict(cfg: RunConfig) -> dict:
    """Normalized document; ``from_dict(to_dict(cfg)) == cfg``."""
    doc = {
        "firms": [{"n": f.n, "L": f.L, "beta": f.beta} for f in cfg.market.firms],
        "demand": {"scale": cfg.market.demand.scale, "elasticity": cfg.market.demand.elasticity},
        "solver": {
            "tol": cfg.solver.tol,
            "max_iter": cfg.solver.max_iter,
            "reg_t": cfg.solver.reg_t,
            "reg_lambda": cfg.solver.reg_lambda,
            "reg_mu": cfg.solver.reg_mu,
            "reg_eta": cfg.solver.reg_eta,
            "method": cfg.solver.method.value,
        },
        "phi": cfg.phi.value,
        "cost_variant": cfg.market.cost_variant.value,
        "initial_point": list(cfg.initial_point),
    }
    output = {k: v for k, v in (("trace", cfg.trace_path), ("json", cfg.json_path)) if v is not None}
    if output:
        doc["output"] = output
    if cfg.description:
        doc["description"] = cfg.description
    return doc


def dump_config(cfg: RunConfig) -> str:
    return json.dumps(to_dict(cfg), indent=2)


def bundled_path(name: str):
    return resources.files("ncp_eq").joinpath("data", name)


def load_config(path: str) -> RunConfig:
    """Read a config file; bare names of bundled fixtures also resolve."""
    p = Path(path)
    if p.is_file():
        text = p.read_text(encoding="utf-8")
    elif p.name in BUNDLED and p.parent == Path("."):
        text = bundled_path(p.name).read_text(encoding="utf-8")
    else:
        raise ConfigError(f"{path}: no such config file")
    try:
        return parse_config(text)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None
