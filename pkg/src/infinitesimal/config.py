"""Experiment configuration, stored as YAML."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .errors import ConfigError
from .grid import Grid, GridDistribution, read_csv
from .initial import STEP_PRESETS, GaussianDatum, StepDatum
from .operators import Mode, ModelParams


@dataclass
class GridConfig:
    x_min: float = -15.0
    x_max: float = 60.0
    dx: float = 0.001

    def build(self) -> Grid:
        try:
            return Grid(self.x_min, self.x_max, self.dx)
        except ValueError as exc:
            raise ConfigError(f"grid: {exc}") from exc


@dataclass
class InitialConfig:
    kind: str = "step"
    parameters: dict[str, Any] = field(default_factory=lambda: {"preset": "four-block"})

    def datum(self) -> StepDatum | GaussianDatum | None:
        p = self.parameters
        try:
            if self.kind == "step":
                if "preset" in p:
                    return STEP_PRESETS[p["preset"]]
                return StepDatum(
                    tuple(tuple(float(v) for v in iv) for iv in p["intervals"]),
                    tuple(float(h) for h in p["heights"]),
                )
            if self.kind == "gaussian":
                return GaussianDatum(float(p["mean"]), float(p["variance"]))
            if self.kind == "csv":
                return None
        except KeyError as exc:
            raise ConfigError(f"initial.parameters: missing or unknown key {exc}") from exc
        raise ConfigError(f"initial.kind: unknown kind {self.kind!r}")

    def profile(self, grid: Grid) -> GridDistribution:
        if self.kind == "csv":
            try:
                f = read_csv(self.parameters["path"])
            except KeyError as exc:
                raise ConfigError("initial.parameters: csv needs a path") from exc
            if f.grid.n_points != grid.n_points:
                raise ConfigError("initial csv grid does not match the configured grid")
            return GridDistribution(grid, f.values)
        return self.datum().profile(grid)


@dataclass
class ExperimentConfig:
    alpha: float
    beta: float = 1.0
    mode: str = Mode.NON_OVERLAPPING.value
    grid: GridConfig = field(default_factory=GridConfig)
    initial: InitialConfig = field(default_factory=InitialConfig)
    n_iters: int = 150
    snapshot_generations: list[int] = field(default_factory=list)
    seed: int = 0
    outputs: str = "out"
    # optional fixed fit windows per metric, e.g. {"kl": [10, 150]}
    rate_windows: dict[str, list[int]] = field(default_factory=dict)

    def __post_init__(self):
        try:
            self.alpha = float(self.alpha)
            self.beta = float(self.beta)
            self.n_iters = int(self.n_iters)
            self.seed = int(self.seed)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad scalar value: {exc}") from exc
        if isinstance(self.grid, dict):
            self.grid = GridConfig(**_known(self.grid, GridConfig, "grid"))
        if isinstance(self.initial, dict):
            self.initial = InitialConfig(**_known(self.initial, InitialConfig, "initial"))
        self.snapshot_generations = [int(g) for g in self.snapshot_generations]
        if self.mode not in {m.value for m in Mode}:
            raise ConfigError(f"mode: expected one of {[m.value for m in Mode]}, got {self.mode!r}")
        if self.n_iters < 0:
            raise ConfigError("n_iters must be non-negative")

    def params(self) -> ModelParams:
        try:
            return ModelParams(self.alpha, self.beta, Mode(self.mode))
        except (ValueError, ArithmeticError) as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a mapping")
        if "alpha" not in d:
            raise ConfigError("missing required key 'alpha'")
        return cls(**_known(d, cls, "config"))

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    @classmethod
    def from_yaml(cls, text: str) -> "ExperimentConfig":
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            where = f" at line {mark.line + 1}" if mark else ""
            raise ConfigError(f"invalid YAML{where}: {exc}") from exc
        return cls.from_dict(data)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_yaml(text)


def _known(d: dict, cls, section: str) -> dict:
    allowed = set(cls.__dataclass_fields__)
    extra = set(d) - allowed
    if extra:
        raise ConfigError(f"{section}: unknown keys {sorted(extra)}")
    return d


def preset(name: str) -> ExperimentConfig:
    if name == "weak":
        return ExperimentConfig(
            alpha=0.015, n_iters=150, snapshot_generations=[0, 1, 2, 3, 4, 7, 150]
        )
    if name == "strong":
        return ExperimentConfig(alpha=0.4, n_iters=15, snapshot_generations=[0, 1, 2, 15])
    raise ConfigError(f"unknown preset {name!r}; choose weak or strong")
