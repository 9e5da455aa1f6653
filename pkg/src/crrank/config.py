"""Run configuration: defaults, overridden by a key=value file, overridden by flags."""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .network import DEFAULT_LAMBDA
from .trips import DEFAULT_MIN_TRIPS, parse_time_windows

CONFIG_ENV = "CRRANK_CONFIG"
DEFAULT_TIERS = (5, 25, 100)


@dataclass(frozen=True)
class RunConfig:
    lam: float = DEFAULT_LAMBDA
    alpha: float = 0.85
    tol: float = 1e-9
    max_iter: int = 200
    min_trips: int = DEFAULT_MIN_TRIPS
    normalize_per_phase: bool = False
    time_window: str | None = None
    network: str | None = None
    regions: str | None = None
    trips: str | None = None
    out_dir: str = "out"
    seed: int = 0
    format: str = "csv"
    tiers: tuple[int, ...] = DEFAULT_TIERS

    def __post_init__(self):
        if self.min_trips < 1:
            raise ValueError("min_trips must be >= 1")
        if self.time_window:
            parse_time_windows(self.time_window)
        if list(self.tiers) != sorted(set(self.tiers)) or not self.tiers or self.tiers[0] < 1:
            raise ValueError(f"tiers must be strictly increasing positive ints, got {self.tiers}")

    @property
    def time_windows(self):
        return parse_time_windows(self.time_window) if self.time_window else None

    def as_dict(self) -> dict:
        d = asdict(self)
        d["tiers"] = list(self.tiers)
        return d


# config-file / flag spellings -> field name
_ALIASES = {"lambda": "lam", "max-iter": "max_iter", "min-trips": "min_trips",
            "time-window": "time_window", "out-dir": "out_dir",
            "normalize-per-phase": "normalize_per_phase"}


def _coerce(name: str, raw):
    if raw is None:
        return None
    kind = {f.name: f.type for f in fields(RunConfig)}[name]
    if not isinstance(raw, str):
        return tuple(raw) if name == "tiers" else raw
    raw = raw.strip()
    if name == "tiers":
        return tuple(int(x) for x in raw.split(",") if x.strip())
    if kind == "bool":
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"{name}: not a boolean: {raw!r}")
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    return raw


def read_config_file(path: str | Path) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            name = _ALIASES.get(key, key.replace("-", "_"))
            if name not in {f.name for f in fields(RunConfig)}:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
            out[name] = _coerce(name, value)
    return out


def resolve_config(flags: dict, environ=None) -> RunConfig:
    """Merge defaults, the file named by CRRANK_CONFIG, and non-None flags."""
    environ = os.environ if environ is None else environ
    values: dict = {}
    cfg_path = environ.get(CONFIG_ENV)
    if cfg_path:
        values.update(read_config_file(cfg_path))
    names = {f.name for f in fields(RunConfig)}
    for key, value in flags.items():
        if key in names and value is not None:
            values[key] = _coerce(key, value)
    return RunConfig(**values)
