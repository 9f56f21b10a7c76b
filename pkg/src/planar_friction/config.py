"""TOML run configuration shared by every CLI command."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import tomli
import tomli_w

from .contact_geometry import (
    SurfaceSpec,
    circle,
    gradient_line,
    hertzian,
    line,
    load_pressure_csv,
    non_convex,
    square,
)
from .distributed import PRESETS, FrictionParams
from .integrators import Adaptive, FixedStep
from .simulation import MODEL_KINDS

SCENARIOS = ("kinematic", "drift_tangential", "drift_normal", "gripper")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SurfaceConfig:
    shape: str = "circle"
    size: float = 0.01
    extent: float | None = None
    reverse: bool = False
    k: float = 2.0
    k_per_newton: float | None = None
    radius_coeff: float = 6.0
    length_unit: float = 1e-3
    csv: str | None = None

    def build(self, base: Path | None = None) -> SurfaceSpec:
        s = self.shape
        if s == "circle":
            return circle(self.size, self.extent)
        if s == "square":
            return square(self.size, self.extent)
        if s == "line":
            return line(self.size, self.extent)
        if s == "line_grad":
            return gradient_line(self.size, self.extent, self.reverse)
        if s in ("non_convex_1", "non_convex_2"):
            return non_convex(int(s[-1]), self.extent or 0.02)
        if s == "hertzian":
            return hertzian(self.k, self.k_per_newton, self.radius_coeff, self.length_unit)
        if s == "custom":
            if not self.csv:
                raise ConfigError("custom surfaces need a 'csv' path")
            path = Path(self.csv)
            if base is not None and not path.is_absolute():
                path = base / path
            return load_pressure_csv(path, self.extent)
        raise ConfigError(f"unknown surface shape {s!r}")


@dataclass(frozen=True)
class FrictionConfig:
    preset: str = "p1"
    elasto_plastic: bool = False
    sigma0: float | None = None
    sigma1: float | None = None
    sigma2: float | None = None
    mu_c: float | None = None
    mu_s: float | None = None
    gamma: float | None = None
    v_s: float | None = None
    s_ba: float | None = None

    def build(self) -> FrictionParams:
        overrides = {
            f.name: getattr(self, f.name)
            for f in fields(self)
            if f.name not in ("preset",) and getattr(self, f.name) is not None
        }
        return FrictionParams.preset(self.preset, **overrides)


@dataclass(frozen=True)
class IntegratorSettings:
    mode: str = "adaptive"
    dt: float = 1e-5
    abs_tol: float = 1e-8
    rel_tol: float = 1e-6
    max_step: float = 1e-3

    def build(self):
        if self.mode == "fixed":
            return FixedStep(self.dt)
        if self.mode == "adaptive":
            return Adaptive(self.abs_tol, self.rel_tol, self.max_step)
        raise ConfigError(f"unknown integrator mode {self.mode!r}")


@dataclass(frozen=True)
class ScenarioConfig:
    id: str = "kinematic"
    duration: float | None = None
    f_N: float = 1.0
    short_profile: bool = False
    case: int = 1
    normal_profile: int = 1
    frequency: float | None = None
    output_dt: float = 1e-3


@dataclass(frozen=True)
class CompareConfig:
    n_oracle: int = 101
    candidates: tuple[str, ...] = ("reduced_ls", "reduced_ellipsoid")
    candidate_n: tuple[int, ...] = ()
    candidate_n_ls: tuple[int, ...] = ()
    dt: float = 1e-5
    throughput: bool = False


@dataclass(frozen=True)
class BenchConfig:
    sizes: tuple[int, ...] = (5, 11, 21, 33)
    warmup: int = 10_000
    iterations: int = 100_000
    repeats: int = 10


@dataclass(frozen=True)
class OutputConfig:
    dir: str = "out"
    cache: str | None = None
    name: str | None = None


@dataclass(frozen=True)
class RunConfig:
    surface: SurfaceConfig = field(default_factory=SurfaceConfig)
    friction: FrictionConfig = field(default_factory=FrictionConfig)
    n: int = 21
    n_ls: int = 20
    model: str = "reduced_ls"
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    integrator: IntegratorSettings = field(default_factory=IntegratorSettings)
    compare: CompareConfig = field(default_factory=CompareConfig)
    bench: BenchConfig = field(default_factory=BenchConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    seed: int = 0
    base_dir: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.n < 2:
            raise ConfigError("n must be at least 2")
        if self.n_ls < 2:
            raise ConfigError("n_ls must be at least 2")
        if self.model not in MODEL_KINDS:
            raise ConfigError(f"unknown model {self.model!r}")
        if self.scenario.id not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario.id!r}")
        if self.friction.preset not in PRESETS:
            raise ConfigError(f"unknown friction preset {self.friction.preset!r}")
        for c in self.compare.candidates:
            if c not in MODEL_KINDS:
                raise ConfigError(f"unknown candidate model {c!r}")

    # -- conversion ----------------------------------------------------------

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("base_dir")
        return _strip_none(d)

    def dumps(self) -> str:
        return tomli_w.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict, base_dir: str | None = None) -> "RunConfig":
        try:
            sections = {
                "surface": SurfaceConfig,
                "friction": FrictionConfig,
                "scenario": ScenarioConfig,
                "integrator": IntegratorSettings,
                "compare": CompareConfig,
                "bench": BenchConfig,
                "output": OutputConfig,
            }
            kwargs = {}
            for key, value in data.items():
                if key in sections:
                    if not isinstance(value, dict):
                        raise ConfigError(f"[{key}] must be a table")
                    kwargs[key] = _build(sections[key], value, key)
                elif key in ("n", "n_ls", "model", "seed"):
                    kwargs[key] = value
                else:
                    raise ConfigError(f"unknown config key {key!r}")
            return cls(**kwargs, base_dir=base_dir)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc

    @classmethod
    def loads(cls, text: str, base_dir: str | None = None) -> "RunConfig":
        try:
            data = tomli.loads(text)
        except tomli.TOMLDecodeError as exc:
            raise ConfigError(f"invalid TOML: {exc}") from exc
        return cls.from_dict(data, base_dir)

    @classmethod
    def load(cls, path) -> "RunConfig":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.loads(text, str(path.parent))

    # -- builders ------------------------------------------------------------

    def surface_spec(self) -> SurfaceSpec:
        base = Path(self.base_dir) if self.base_dir else None
        try:
            return self.surface.build(base)
        except (OSError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad surface: {exc}") from exc

    def params(self) -> FrictionParams:
        try:
            return self.friction.build()
        except ValueError as exc:
            raise ConfigError(f"bad friction parameters: {exc}") from exc

    def integrator_config(self):
        try:
            return self.integrator.build()
        except ValueError as exc:
            raise ConfigError(f"bad integrator settings: {exc}") from exc

    def with_seed(self, seed: int) -> "RunConfig":
        return replace(self, seed=seed)


def _build(cls, values: dict, section: str):
    known = {f.name: f for f in fields(cls)}
    out = {}
    for k, v in values.items():
        if k not in known:
            raise ConfigError(f"unknown key {k!r} in [{section}]")
        out[k] = tuple(v) if isinstance(v, list) else v
    return cls(**out)


def _strip_none(d):
    if isinstance(d, dict):
        return {k: _strip_none(v) for k, v in d.items() if v is not None}
    if isinstance(d, tuple):
        return list(d)
    return d
