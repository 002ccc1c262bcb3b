"""Flat ``key = value`` run configuration with exhaustive validation."""
from __future__ import annotations

import configparser
import math
import os
from dataclasses import dataclass, field, fields, replace

from .experiments import InitialDataSpec
from .model import ModelParams


class ConfigError(ValueError):
    """Carries every problem found in a configuration, not just the first."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.errors))


@dataclass(frozen=True)
class GridConfig:
    n: int = 32
    box_length: float = 2 * math.pi


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 1e-3
    adaptive: bool = False
    safety: float = 0.5
    dt_max: float = 1e-2
    T: float = 2.0
    sample_every: float = 0.05


@dataclass(frozen=True)
class DiagnosticsConfig:
    bmo_mode: str = "proxy"
    C_pi: float = 1.0
    C1: float = 1.0
    C2: float = 1.0
    eps: float = 0.0
    growth_factor: float = 10.0


@dataclass(frozen=True)
class OutputConfig:
    """Output file names; relative names are resolved against ``dir``."""

    dir: str = "."
    series: str = "series.csv"
    checkpoint: str = ""
    sweep: str = "sweep.csv"
    ratios: str = "ratios.csv"

    def path(self, name: str) -> str:
        value = getattr(self, name)
        return value if not value or os.path.isabs(value) else os.path.join(self.dir, value)


@dataclass(frozen=True)
class RunConfig:
    grid: GridConfig = field(default_factory=GridConfig)
    model: ModelParams = field(default_factory=ModelParams)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    initial: InitialDataSpec = field(default_factory=InitialDataSpec)
    diagnostics: DiagnosticsConfig = field(default_factory=DiagnosticsConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    warnings: tuple = field(default=(), compare=False)

    @property
    def seed(self) -> int:
        return self.initial.seed


SECTIONS = {
    "grid": GridConfig,
    "model": ModelParams,
    "integrator": IntegratorConfig,
    "initial": InitialDataSpec,
    "diagnostics": DiagnosticsConfig,
    "output": OutputConfig,
}

# fields whose default is None or a tuple need an explicit parser
_SPECIAL = {
    ("initial", "target_h_half"): "optional_float",
    ("initial", "mode"): "int_triple",
}


def _parse(section: str, name: str, kind, raw: str):
    special = _SPECIAL.get((section, name))
    if special == "optional_float":
        return None if raw.strip().lower() in ("", "none") else float(raw)
    if special == "int_triple":
        parts = [int(p) for p in raw.replace(" ", "").split(",") if p]
        if len(parts) != 3:
            raise ValueError("expected three comma-separated integers")
        return tuple(parts)
    if kind is bool:
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if kind is int:
        return int(raw)
    if kind is float:
        return float(raw)
    return raw.strip()


def _format(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _field_type(cls, name):
    default = getattr(cls(), name) if cls is not ModelParams else getattr(ModelParams(), name)
    return type(default)


def validate(cfg: RunConfig) -> list:
    """All range problems in ``cfg`` (empty list when valid)."""
    errors = []
    n = cfg.grid.n
    if n < 8 or n & (n - 1):
        errors.append(f"grid.n must be a power of two >= 8 (got {n})")
    if not cfg.grid.box_length > 0:
        errors.append(f"grid.box_length must be > 0 (got {cfg.grid.box_length})")
    errors += ["model." + e for e in cfg.model.validate()]
    it = cfg.integrator
    # T = 0 is a valid no-op run (header-only output)
    if not it.T >= 0:
        errors.append(f"integrator.T must be >= 0 (got {it.T})")
    if not it.dt > 0:
        errors.append(f"integrator.dt must be > 0 (got {it.dt})")
    if not it.sample_every > 0:
        errors.append(f"integrator.sample_every must be > 0 (got {it.sample_every})")
    if not 0 < it.safety <= 1:
        errors.append(f"integrator.safety must lie in (0, 1] (got {it.safety})")
    if not it.dt_max > 0:
        errors.append(f"integrator.dt_max must be > 0 (got {it.dt_max})")
    errors += cfg.initial.validate()
    if cfg.initial.kind == "random_band" and cfg.initial.band > n // 3:
        errors.append(f"initial.band must be <= n/3 = {n // 3} (got {cfg.initial.band})")
    d = cfg.diagnostics
    if d.bmo_mode not in ("proxy", "dyadic"):
        errors.append(f"diagnostics.bmo_mode must be proxy or dyadic (got {d.bmo_mode!r})")
    for name in ("C_pi", "C1", "C2"):
        if not getattr(d, name) > 0:
            errors.append(f"diagnostics.{name} must be > 0 (got {getattr(d, name)})")
    if not d.eps >= 0:
        errors.append(f"diagnostics.eps must be >= 0 (got {d.eps})")
    if not d.growth_factor > 1:
        errors.append(f"diagnostics.growth_factor must be > 1 (got {d.growth_factor})")
    return errors


def _regime_warnings(values: dict) -> list:
    out = []
    for name in ("alpha", "beta"):
        val = values.get(name, 3.0)
        if val >= 1 and not 2.5 <= val < 4:
            out.append(f"model.{name}={val} lies outside [5/2, 4): theory_regime is false")
    return out


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None, default_section="__none__")
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError([f"parse error: {exc}"]) from exc

    errors = []
    raw_values = {}
    for section in parser.sections():
        if section not in SECTIONS:
            errors.append(f"unknown section [{section}]")
            continue
        cls = SECTIONS[section]
        known = {f.name: f for f in fields(cls)}
        values = {}
        for key, raw in parser.items(section):
            if key not in known:
                errors.append(f"unknown key {section}.{key}")
                continue
            try:
                values[key] = _parse(section, key, _field_type(cls, key), raw)
            except ValueError as exc:
                errors.append(f"{section}.{key}: cannot parse {raw!r} ({exc})")
        raw_values[section] = values

    # build each section without its own validation so every error is reported
    model_values = raw_values.get("model", {})
    base = ModelParams()
    probe = object.__new__(ModelParams)
    for f in fields(ModelParams):
        object.__setattr__(probe, f.name, model_values.get(f.name, getattr(base, f.name)))
    errors += ["model." + e for e in probe.validate()]

    sections = {}
    for name, cls in SECTIONS.items():
        if name == "model":
            continue
        sections[name] = cls(**raw_values.get(name, {}))
    if errors:
        # still collect range errors of the other sections
        tmp = RunConfig(model=ModelParams(), **sections)
        errors += [e for e in validate(tmp) if not e.startswith("model.")]
        raise ConfigError(errors)
    cfg = RunConfig(model=ModelParams(**model_values), **sections)
    errors = validate(cfg)
    if errors:
        raise ConfigError(errors)
    return replace(cfg, warnings=tuple(_regime_warnings(model_values)))


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError([f"cannot read config {path}: {exc}"]) from exc
    return parse_config(text, str(path))


def dump_config(cfg: RunConfig) -> str:
    """Canonical text form; ``parse_config(dump_config(c)) == c``."""
    lines = []
    for name in SECTIONS:
        obj = getattr(cfg, name)
        lines.append(f"[{name}]")
        for f in fields(obj):
            lines.append(f"{f.name} = {_format(getattr(obj, f.name))}")
        lines.append("")
    return "\n".join(lines)
