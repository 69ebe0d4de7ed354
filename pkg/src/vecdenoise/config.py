"""Pipeline configuration and the flat ``key = value`` config file format."""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import ConfigError
from .optim import OptimConfig
from .scale_space import DEFAULT_SCHEDULE, validate_schedule

_SECTION = "vecdenoise"


@dataclass
class PipelineConfig:
    schedule: list[tuple[float, float]] = field(default_factory=lambda: list(DEFAULT_SCHEDULE))
    w_g: float = 0.0
    w_l: float = 0.0
    tau_seg: float = 0.05
    min_area: int = 16
    tau_new: float = 0.05
    diff_threshold: float = 0.1
    k_init: int = 4
    max_refinements_per_component: int = 3
    gamma_decay: float = 0.7
    freeze_accepted: bool = False
    optim: OptimConfig = field(default_factory=OptimConfig)
    dump_dir: str | None = None

    def validate(self) -> "PipelineConfig":
        self.schedule = validate_schedule(self.schedule)
        if self.w_g < 0 or self.w_l < 0:
            raise ConfigError("w_g and w_l must be non-negative")
        if not self.tau_seg > 0 or not self.tau_new > 0:
            raise ConfigError("tau_seg and tau_new must be positive")
        if self.min_area < 1:
            raise ConfigError("min_area must be at least 1")
        if not self.diff_threshold > 0:
            raise ConfigError("diff_threshold must be positive")
        if self.k_init < 2:
            raise ConfigError("k_init must be at least 2")
        if self.max_refinements_per_component < 0:
            raise ConfigError("max_refinements_per_component must be non-negative")
        if not 0 < self.gamma_decay <= 1:
            raise ConfigError("gamma_decay must lie in (0, 1]")
        self.optim.validate()
        return self

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            if f.name == "optim":
                continue
            out[f.name] = getattr(self, f.name)
        out["schedule"] = [list(p) for p in self.schedule]
        for f in fields(self.optim):
            key = "lambda" if f.name == "lam" else f.name
            out[key] = getattr(self.optim, f.name)
        return out


def _parse_schedule(text: str) -> list[tuple[float, float]]:
    levels = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = [p.strip() for p in chunk.split(",")]
        if len(parts) != 2:
            raise ConfigError(f"schedule level must be 'mu, sigma', got {chunk!r}")
        levels.append((float(parts[0]), float(parts[1])))
    return levels


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def config_from_mapping(values: dict) -> PipelineConfig:
    """Build a validated config from string (or typed) values keyed by option name."""
    cfg = PipelineConfig()
    top = {f.name: f for f in fields(PipelineConfig)}
    inner = {("lambda" if f.name == "lam" else f.name): f for f in fields(OptimConfig)}
    for key, raw in values.items():
        key = key.strip().lower()
        try:
            if key == "schedule":
                cfg.schedule = _parse_schedule(raw) if isinstance(raw, str) else list(raw)
            elif key == "dump_dir":
                cfg.dump_dir = (str(raw).strip() or None) if raw is not None else None
            elif key in top and key != "optim":
                setattr(cfg, key, _coerce(top[key].type, raw))
            elif key in inner:
                setattr(cfg.optim, inner[key].name, _coerce(inner[key].type, raw))
            else:
                raise ConfigError(f"unknown config key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc
    return cfg.validate()


def _coerce(type_name, raw):
    type_name = str(type_name)
    if isinstance(raw, str):
        if type_name == "bool":
            return _parse_bool(raw)
        if type_name == "int":
            return int(raw.strip())
        return float(raw.strip())
    if type_name == "int":
        if int(raw) != raw:
            raise ConfigError(f"expected an integer, got {raw!r}")
        return int(raw)
    if type_name == "bool":
        return bool(raw)
    return float(raw)


def parse_config_text(text: str) -> PipelineConfig:
    parser = configparser.ConfigParser(
        delimiters=("=",), comment_prefixes=("#",), inline_comment_prefixes=("#",)
    )
    try:
        parser.read_string(f"[{_SECTION}]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    return config_from_mapping(dict(parser[_SECTION]))


def load_config(path) -> PipelineConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ConfigError(f"config file is not UTF-8: {path}") from exc
    return parse_config_text(text)
