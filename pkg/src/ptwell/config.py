"""Run configuration: TOML file -> typed, validated RunConfig."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import tomli

from .errors import ConfigError


@dataclass(frozen=True)
class PotentialConfig:
    v0: tuple[float, ...] = (0.0, 0.0, -0.5, 0.0, 0.05)
    w: tuple[float, ...] = (0.0, 1.0)
    pt_enforced: bool = True
    polydisc: tuple[float, ...] = ()


@dataclass(frozen=True)
class GridConfig:
    L: float = 0.0  # 0 selects L_factor * outer turning point at the window's top energy
    L_factor: float = 1.5
    N: int = 4000


@dataclass(frozen=True)
class SweepConfig:
    h: tuple[float, ...] = (0.01,)
    eps: tuple[float, ...] = (0.0,)


@dataclass(frozen=True)
class WindowConfig:
    center: tuple[float, float] = (-1.0, 0.0)
    half_width: float = 0.1
    half_height: float = 1e-3
    # imaginary half-height grows by im_growth * eps to follow eigenvalues leaving the axis
    im_growth: float = 0.0
    spacing: float = 0.0  # expected level spacing; 0 estimates it from the actions


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-12
    m: int = 8
    max_restart: int = 30


@dataclass(frozen=True)
class QuadratureConfig:
    n_nodes: int = 128


@dataclass(frozen=True)
class LocalizationConfig:
    C: float = 10.0


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    formats: tuple[str, ...] = ("csv",)


@dataclass(frozen=True)
class RunConfig:
    E0: float = -1.0
    potential: PotentialConfig = field(default_factory=PotentialConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    window: WindowConfig = field(default_factory=WindowConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)
    localization: LocalizationConfig = field(default_factory=LocalizationConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def config_hash(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:12]

    def validate(self) -> RunConfig:
        p = self.potential
        if len(p.v0) < 5 or p.v0[-1] <= 0:
            raise ConfigError("potential.v0 needs degree >= 4 with a positive leading coefficient")
        if p.polydisc and len(p.polydisc) != 2:
            raise ConfigError("potential.polydisc must be [r_E, r_eps]")
        if self.grid.N < 2 or self.grid.N % 2:
            raise ConfigError("grid.N must be even and >= 2")
        if self.grid.L < 0 or self.grid.L_factor <= 1:
            raise ConfigError("grid.L must be >= 0 and grid.L_factor > 1")
        if not self.sweep.h or any(not (0 < h <= 1) for h in self.sweep.h):
            raise ConfigError("sweep.h values must lie in (0, 1]")
        if not self.sweep.eps or any(not math.isfinite(e) for e in self.sweep.eps):
            raise ConfigError("sweep.eps must be a non-empty list of finite numbers")
        if self.window.half_width <= 0 or self.window.half_height <= 0:
            raise ConfigError("window half sizes must be positive")
        if not (1 <= self.solver.m <= 40) or self.solver.tol <= 0 or self.solver.max_restart < 1:
            raise ConfigError("solver.m must be in [1, 40], tol > 0, max_restart >= 1")
        if self.quadrature.n_nodes < 16:
            raise ConfigError("quadrature.n_nodes must be >= 16")
        if self.localization.C <= 0:
            raise ConfigError("localization.C must be positive")
        unknown = set(self.output.formats) - {"csv", "svg"}
        if unknown:
            raise ConfigError(f"unknown output formats {sorted(unknown)}")
        return self


_SECTIONS = {f.name: f for f in fields(RunConfig)}


def _build(cls, data: dict, where: str):
    known = {f.name: f for f in fields(cls)}
    extra = set(data) - set(known)
    if extra:
        raise ConfigError(f"unknown keys in [{where}]: {sorted(extra)}")
    kwargs = {}
    defaults = cls()
    for name, value in data.items():
        current = getattr(defaults, name)
        if isinstance(current, tuple):
            if not isinstance(value, list):
                raise ConfigError(f"{where}.{name} must be an array")
            value = tuple(value)
        elif isinstance(current, bool):
            if not isinstance(value, bool):
                raise ConfigError(f"{where}.{name} must be a boolean")
        elif isinstance(current, int):
            if not isinstance(value, int) or isinstance(value, bool):
                raise ConfigError(f"{where}.{name} must be an integer")
        elif isinstance(current, float):
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ConfigError(f"{where}.{name} must be a number")
            value = float(value)
        elif isinstance(current, str) and not isinstance(value, str):
            raise ConfigError(f"{where}.{name} must be a string")
        kwargs[name] = value
    return cls(**kwargs)


def config_from_dict(data: dict) -> RunConfig:
    extra = set(data) - set(_SECTIONS)
    if extra:
        raise ConfigError(f"unknown top-level keys: {sorted(extra)}")
    kwargs = {}
    for name, value in data.items():
        if name == "E0":
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ConfigError("E0 must be a number")
            kwargs[name] = float(value)
            continue
        if not isinstance(value, dict):
            raise ConfigError(f"[{name}] must be a table")
        kwargs[name] = _build(type(getattr(RunConfig(), name)), value, name)
    return RunConfig(**kwargs).validate()


def load_config(path: str | Path) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            data = tomli.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    return config_from_dict(data)


def figure1_config() -> RunConfig:
    """h = 0.01 and eps = k 10^-m (k = 1..5, m = 2..5) around the barrier top."""
    eps = tuple(float(f"{k}e-{m}") for m in range(5, 1, -1) for k in range(1, 6))
    return RunConfig(
        E0=-1.0,
        grid=GridConfig(L=4.0, N=4000),
        sweep=SweepConfig(h=(0.01,), eps=eps),
        window=WindowConfig(center=(-0.2, 0.0), half_width=0.5, half_height=2e-3, im_growth=3.0, spacing=0.16),
        solver=SolverConfig(tol=1e-12, m=24, max_restart=30),
        output=OutputConfig(directory="out", formats=("csv", "svg")),
    ).validate()
