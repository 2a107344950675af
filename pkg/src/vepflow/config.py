"""TOML run configuration with strict key checking.

Unknown sections or keys raise :class:`ConfigError`; dumping a parsed
configuration and parsing it again gives the same object.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import tomli
import tomli_w

from . import potentials as pot
from .scenarios import ScenarioSpec, make_pair
from .solver import SolverConfig


class ConfigError(ValueError):
    pass


@dataclass
class PotentialConfig:
    kind: str = "zero"
    a: float = 1.0
    sigma_yield: float = 1.0
    epsilon: float = 0.0

    def build(self):
        return pot.from_config({"kind": self.kind, "a": self.a, "sigma_yield": self.sigma_yield})


@dataclass
class WeightConfig:
    kind: str = "zero"
    C: float = 1.0
    r: float = 6.0
    p: float = 6.0
    calibrate: bool = True


@dataclass
class DiagnosticsConfig:
    pairs: list = field(default_factory=list)
    weight: WeightConfig = field(default_factory=WeightConfig)
    calibration_times: int = 5
    safety: float = 2.0


@dataclass
class OutputConfig:
    dir: str = "out"
    record_every: int = 1
    checkpoint_every: int = 0


@dataclass
class SweepConfig:
    gammas: list = field(default_factory=list)


@dataclass
class WeakStrongConfig:
    delta: float = 1e-3
    seed: int = 1


@dataclass
class SolverSection:
    mu: float = 0.1
    eta: float = 1.0
    gamma: float = 0.1
    dt: float = 1e-3
    t_end: float = 1.0
    cfl_safety: float = 0.5
    splitting: str = "lie"
    dealias: bool = True


@dataclass
class RunConfig:
    scenario: ScenarioSpec = field(default_factory=ScenarioSpec)
    solver: SolverSection = field(default_factory=SolverSection)
    potential: PotentialConfig = field(default_factory=PotentialConfig)
    diagnostics: DiagnosticsConfig = field(default_factory=DiagnosticsConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    weak_strong: WeakStrongConfig = field(default_factory=WeakStrongConfig)

    def solver_config(self) -> SolverConfig:
        s = self.solver
        return SolverConfig(
            mu=s.mu, eta=s.eta, gamma=s.gamma, dt=s.dt, t_end=s.t_end, cfl_safety=s.cfl_safety,
            splitting=s.splitting, dealias=s.dealias, forcing=self.scenario.forcing_fn(),
        )

    def to_dict(self) -> dict:
        out = {"scenario": self.scenario.to_dict()}
        for name in ("solver", "potential", "diagnostics", "output", "sweep", "weak_strong"):
            out[name] = asdict(getattr(self, name))
        return out


def _strict(cls, data: dict, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"[{where}] must be a table")
    known = {f.name: f for f in fields(cls)}
    extra = sorted(set(data) - set(known))
    if extra:
        raise ConfigError(f"unknown key(s) in [{where}]: {', '.join(extra)}")
    kwargs = {}
    for k, v in data.items():
        default = getattr(cls(), k) if k != "weight" else None
        if k == "weight":
            v = _strict(WeightConfig, v, f"{where}.weight")
        elif isinstance(default, bool):
            if not isinstance(v, bool):
                raise ConfigError(f"[{where}] {k} must be a boolean")
        elif isinstance(default, int):
            if isinstance(v, bool) or not isinstance(v, int):
                raise ConfigError(f"[{where}] {k} must be an integer")
        elif isinstance(default, float):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"[{where}] {k} must be a number")
            v = float(v)
        elif isinstance(default, list) and not isinstance(v, list):
            raise ConfigError(f"[{where}] {k} must be a list")
        kwargs[k] = v
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{where}] {exc}") from exc


def from_dict(data: dict) -> RunConfig:
    sections = {
        "solver": SolverSection, "potential": PotentialConfig, "diagnostics": DiagnosticsConfig,
        "output": OutputConfig, "sweep": SweepConfig, "weak_strong": WeakStrongConfig,
    }
    extra = sorted(set(data) - set(sections) - {"scenario"})
    if extra:
        raise ConfigError(f"unknown section(s): {', '.join(extra)}")
    kwargs = {name: _strict(cls, data[name], name) for name, cls in sections.items() if name in data}
    if "scenario" in data:
        sc = dict(data["scenario"])
        allowed = {"name", "dim", "n", "length", "velocity", "stress", "forcing"}
        bad = sorted(set(sc) - allowed)
        if bad:
            raise ConfigError(f"unknown key(s) in [scenario]: {', '.join(bad)}")
        try:
            kwargs["scenario"] = ScenarioSpec(**sc)
            kwargs["scenario"].grid
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"[scenario] {exc}") from exc
    cfg = RunConfig(**kwargs)
    try:
        cfg.solver_config()
        cfg.potential.build()
        for name in cfg.diagnostics.pairs:
            make_pair(name, cfg.scenario.dim)
        if cfg.output.record_every < 1:
            raise ValueError("output.record_every must be >= 1")
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if not math.isclose(cfg.solver.t_end / cfg.solver.dt, round(cfg.solver.t_end / cfg.solver.dt), abs_tol=1e-9):
        raise ConfigError("t_end must be an integer multiple of dt")
    return cfg


def load(path: str | Path) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            data = tomli.load(fh)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return from_dict(data)


def dumps(cfg: RunConfig) -> str:
    return tomli_w.dumps(cfg.to_dict())
