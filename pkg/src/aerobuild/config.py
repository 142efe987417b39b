"""Run configuration: one YAML key per command-line flag.

Precedence: built-in defaults, then the config file, then flags given on the
command line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import yaml


class ConfigError(ValueError):
    pass


def _bool(v) -> bool:
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected on/off, got {v!r}")


def _floats(n):
    def conv(v):
        vals = v if isinstance(v, (list, tuple)) else str(v).split(",")
        out = [float(x) for x in vals]
        if len(out) != n:
            raise ConfigError(f"expected {n} comma-separated numbers, got {v!r}")
        return out
    return conv


def _ints(n):
    def conv(v):
        return [int(x) for x in _floats(n)(v)]
    return conv


def _forced(v):
    """``"ATTEMPT:DX,DY;..."`` -> [[attempt, dx, dy], ...]."""
    if isinstance(v, list):
        return [[int(a) for a in item] for item in v]
    out = []
    for item in filter(None, (s.strip() for s in str(v).split(";"))):
        try:
            attempt, off = item.split(":")
            dx, dy = off.split(",")
            out.append([int(attempt), int(dx), int(dy)])
        except ValueError:
            raise ConfigError(f"bad forced offset {item!r}; expected ATTEMPT:DX,DY") from None
    return out


@dataclass(frozen=True)
class Option:
    key: str
    default: object
    conv: object
    help: str
    metavar: str | None = None


OPTIONS = (
    Option("seed", 0, int, "master RNG seed"),
    Option("backend", "mock", str, "planner backend: mock or live", "{mock,live}"),
    Option("provider", "openai", str, "live payload adapter: openai or anthropic",
           "{openai,anthropic}"),
    Option("model", "gpt-4o", str, "live model name"),
    Option("endpoint", "https://api.openai.com/v1", str, "live API base URL"),
    Option("api_key_env", "OPENAI_API_KEY", str, "environment variable holding the API key"),
    Option("timeout_s", 60.0, float, "live request timeout in seconds"),
    Option("max_retries", 3, int, "live retries with exponential backoff"),
    Option("temperature", 0.0, float, "sampling temperature for live requests"),
    Option("max_tokens", 1024, int, "completion token limit for live requests"),
    Option("world_dims", [100, 100, 100], _ints(3), "world size H,W,L in cells", "H,W,L"),
    Option("cell_size_m", 0.01, float, "world cell size in meters"),
    Option("pad_size", 5, int, "pad side length in cells"),
    Option("pad_origin", [10, 10], _ints(2), "world cell of pad cell (0,0)", "X,Y"),
    Option("spacing_m", 0.04, float, "pad cell pitch in meters"),
    Option("pad_anchor", [0.16, 0.0, 0.0], _floats(3),
           "world position of the pad's bottom-right notch", "X,Y,Z"),
    Option("pad_yaw_deg", 0.0, float, "pad yaw about +z in degrees"),
    Option("misplace_prob", 0.0, float, "probability a block lands in a neighbouring cell"),
    Option("drop_fail_prob", 0.0, float, "probability a block is not released"),
    Option("pickup_fail_prob", 0.0, float, "probability a pickup try fails"),
    Option("force_offset", [], _forced, "force misplacements, e.g. '0:1,0;3:0,-1'",
           "A:DX,DY;..."),
    Option("reprompt", True, _bool, "re-plan after a misplaced block", "{on,off}"),
    Option("max_reprompts", 5, int, "re-plan budget per build"),
    Option("max_steps", 60, int, "placement attempts per build"),
    Option("dump_frames", False, _bool, "write per-step before/after PPM frames", "{on,off}"),
    Option("out_dir", "runs", str, "output directory"),
    Option("workers", 1, int, "parallel trials/runs"),
    Option("trials", 5, int, "trials per constrained prompt"),
    Option("suite", "", str, "constrained-prompt corpus (YAML); empty = bundled corpus", "PATH"),
    Option("designs", "", str, "comma-separated design names; empty = all mock designs",
           "LIST"),
    Option("seeds", 10, int, "number of seeds per design in the matrix"),
)
DEFAULTS = {o.key: o.default for o in OPTIONS}
CONVERTERS = {o.key: o.conv for o in OPTIONS}


@dataclass(frozen=True)
class RunConfig:
    values: dict = field(default_factory=lambda: dict(DEFAULTS))

    def __getattr__(self, name):
        try:
            return self.values[name]
        except KeyError:
            raise AttributeError(name) from None

    def with_overrides(self, overrides: dict) -> "RunConfig":
        merged = dict(self.values)
        for k, v in overrides.items():
            if v is None:
                continue
            merged[k] = _convert(k, v)
        cfg = RunConfig(merged)
        cfg.validate()
        return cfg

    def validate(self):
        v = self.values
        if v["backend"] not in ("mock", "live"):
            raise ConfigError(f"backend must be mock or live, got {v['backend']!r}")
        if v["provider"] not in ("openai", "anthropic"):
            raise ConfigError(f"provider must be openai or anthropic, got {v['provider']!r}")
        for k in ("misplace_prob", "drop_fail_prob", "pickup_fail_prob"):
            if not 0.0 <= v[k] <= 1.0:
                raise ConfigError(f"{k} must be in [0, 1]")
        for k in ("pad_size", "max_steps", "workers", "trials", "seeds"):
            if v[k] < 1:
                raise ConfigError(f"{k} must be >= 1")
        if v["max_reprompts"] < 0:
            raise ConfigError("max_reprompts must be >= 0")
        if not (v["spacing_m"] > 0 and v["cell_size_m"] > 0 and math.isfinite(v["pad_yaw_deg"])):
            raise ConfigError("spacing_m and cell_size_m must be positive")

    def to_dict(self) -> dict:
        return dict(self.values)


def _convert(key, value):
    if key not in CONVERTERS:
        raise ConfigError(f"unknown config key {key!r}")
    try:
        return CONVERTERS[key](value)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {value!r} ({exc})") from None


def load_config(path: str | Path | None) -> RunConfig:
    base = RunConfig()
    if path is None:
        return base
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        data = yaml.safe_load(p.read_text()) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {p}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{p} must contain a mapping of config keys")
    return base.with_overrides(data)
