"""Run configuration: YAML schema, defaults and validation."""
from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .caching import DEFAULT_BITS_PER_ENTRY, DEFAULT_CAPACITY, DEFAULT_HASHES, STRATEGIES
from .energy import DEFAULT_CHASSIS_W, DEFAULT_LINE_CARD_W, DEFAULT_PANEL_RATING_W
from .simulation import DEFAULT_WARMUP_HOURS
from .weather import DEFAULT_SEASONS
from .workload import DEFAULT_RATE, DEFAULT_ZIPF_S


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class RunConfig:
    topology: str | None = None
    synthetic_topology: dict | None = None
    servers: int = 40
    clients: int = 80
    weather: str | None = None
    synthetic_weather: dict | None = None
    scenarios: list[str] = field(default_factory=lambda: ["A"])
    strategies: list[str] = field(default_factory=lambda: ["cachedbit"])
    alphas: list[float] = field(default_factory=lambda: [0.0])
    seasons: list[Any] = field(default_factory=lambda: list(DEFAULT_SEASONS))
    request_rate: int = DEFAULT_RATE
    catalog_size: int = 100_000
    zipf_s: float = DEFAULT_ZIPF_S
    cache_capacity: int = DEFAULT_CAPACITY
    turbine: Any = "hy5"
    panel_rating_w: float = DEFAULT_PANEL_RATING_W
    chassis_w: float = DEFAULT_CHASSIS_W
    line_card_w: float = DEFAULT_LINE_CARD_W
    bloom_bits_per_entry: int = DEFAULT_BITS_PER_ENTRY
    bloom_hashes: int = DEFAULT_HASHES
    beta_step: float = 0.1
    hop_budget_factor: int = 4
    reply_symmetry: bool = True
    warmup_hours: int = DEFAULT_WARMUP_HOURS
    seed: int = 1
    output: str = "results"
    base_dir: str = field(default=".", repr=False)

    # -- construction ------------------------------------------------------

    @classmethod
    def from_mapping(cls, raw: dict, base_dir: str | Path = ".") -> "RunConfig":
        raw = dict(raw or {})
        # accept singular spellings
        for single, plural in (("scenario", "scenarios"), ("strategy", "strategies"),
                               ("alpha", "alphas"), ("season", "seasons")):
            if single in raw:
                if plural in raw:
                    raise ConfigError(single, f"give either {single!r} or {plural!r}, not both")
                val = raw.pop(single)
                raw[plural] = val if isinstance(val, list) else [val]
        bloom = raw.pop("bloom", None)
        if bloom is not None:
            if not isinstance(bloom, dict):
                raise ConfigError("bloom", "expected a mapping with bits_per_entry / hashes")
            raw.setdefault("bloom_bits_per_entry", bloom.get("bits_per_entry", DEFAULT_BITS_PER_ENTRY))
            raw.setdefault("bloom_hashes", bloom.get("hashes", DEFAULT_HASHES))
        roles = raw.pop("roles", None)
        if roles is not None:
            raw.setdefault("servers", roles.get("servers", 40))
            raw.setdefault("clients", roles.get("clients", 80))
        known = {f.name for f in dataclasses.fields(cls)} - {"base_dir"}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError(unknown[0], "unknown configuration field")
        cfg = cls(**raw, base_dir=str(base_dir))
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        path = Path(path)
        with open(path, encoding="utf-8") as fh:
            raw = yaml.safe_load(fh) or {}
        if not isinstance(raw, dict):
            raise ConfigError("<root>", "configuration must be a mapping")
        return cls.from_mapping(raw, path.parent)

    def override(self, **changes) -> "RunConfig":
        changes = {k: v for k, v in changes.items() if v is not None}
        cfg = dataclasses.replace(self, **changes)
        cfg.validate()
        return cfg

    def resolve(self, name: str | None) -> Path | None:
        if name is None:
            return None
        p = Path(name)
        return p if p.is_absolute() else Path(self.base_dir) / p

    # -- validation --------------------------------------------------------

    def validate(self):
        if (self.topology is None) == (self.synthetic_topology is None):
            raise ConfigError("topology", "give exactly one of 'topology' (file) or 'synthetic_topology'")
        if self.topology is not None and not self.resolve(self.topology).is_file():
            raise ConfigError("topology", f"file not found: {self.resolve(self.topology)}")
        if self.weather is not None and self.synthetic_weather is not None:
            raise ConfigError("weather", "give either 'weather' (file) or 'synthetic_weather', not both")
        if self.weather is not None and not self.resolve(self.weather).is_file():
            raise ConfigError("weather", f"file not found: {self.resolve(self.weather)}")
        if not self.alphas:
            raise ConfigError("alphas", "at least one alpha is required")
        for a in self.alphas:
            if not isinstance(a, (int, float)) or isinstance(a, bool) or not 0.0 <= float(a) <= 1.0:
                raise ConfigError("alphas", f"alpha {a!r} outside [0, 1]")
        self.alphas = [float(a) for a in self.alphas]
        if not self.strategies:
            raise ConfigError("strategies", "at least one strategy is required")
        for s in self.strategies:
            if s not in STRATEGIES:
                raise ConfigError("strategies", f"unknown strategy {s!r}; choose from {sorted(STRATEGIES)}")
        if not self.scenarios:
            raise ConfigError("scenarios", "at least one scenario is required")
        for s in self.scenarios:
            if s not in ("A", "B"):
                raise ConfigError("scenarios", f"unknown scenario {s!r}; expected A or B")
        if not self.seasons:
            raise ConfigError("seasons", "at least one season window is required")
        for s in self.seasons:
            if isinstance(s, str):
                if s not in DEFAULT_SEASONS:
                    raise ConfigError("seasons", f"unknown season {s!r}; use {sorted(DEFAULT_SEASONS)} or a mapping")
            elif isinstance(s, dict):
                if set(s) != {"name", "start_hour", "length_hours"}:
                    raise ConfigError("seasons", "custom windows need name, start_hour and length_hours")
                if s["start_hour"] < 0 or s["length_hours"] <= 0:
                    raise ConfigError("seasons", f"window {s['name']!r} has a negative start or empty length")
            else:
                raise ConfigError("seasons", f"cannot interpret season {s!r}")
        names = [s if isinstance(s, str) else s["name"] for s in self.seasons]
        if len(set(names)) != len(names):
            raise ConfigError("seasons", "season names must be unique")
        for name, lo in (("request_rate", 0), ("catalog_size", 1), ("cache_capacity", 0), ("servers", 1),
                         ("clients", 1), ("bloom_bits_per_entry", 1), ("bloom_hashes", 1),
                         ("hop_budget_factor", 1), ("warmup_hours", 0)):
            val = getattr(self, name)
            if not isinstance(val, int) or isinstance(val, bool) or val < lo:
                raise ConfigError(name, f"expected an integer >= {lo}, got {val!r}")
        for name in ("panel_rating_w", "chassis_w", "line_card_w", "zipf_s"):
            val = getattr(self, name)
            if not isinstance(val, (int, float)) or val < 0 or (name != "zipf_s" and val == 0):
                raise ConfigError(name, f"expected a positive number, got {val!r}")
        if not 0 < self.beta_step <= 1:
            raise ConfigError("beta_step", "expected a step in (0, 1]")
        if not isinstance(self.turbine, (str, dict)):
            raise ConfigError("turbine", "expected a curve name or a mapping with 'points'")
        if isinstance(self.turbine, dict) and "points" not in self.turbine:
            raise ConfigError("turbine", "custom curve needs 'points'")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise ConfigError("seed", f"expected an integer, got {self.seed!r}")

    # -- bookkeeping -------------------------------------------------------

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("base_dir")
        return d

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()
