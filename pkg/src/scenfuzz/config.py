"""Campaign configuration (JSON on disk)."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from .abstraction import AbstractionConfig
from .archetypes import ARCHETYPES
from .causal import DiscoveryConfig
from .mutation import MutationConfig
from .planner import PlannerConfig
from .scenario import SCHEMA_VERSION, check_schema

METHODS = ("causal", "random", "ga")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class CampaignConfig:
    archetype: str = "lane-follow"
    method: str = "causal"
    seed: int = 0
    budget: int = 200
    time_budget: Optional[float] = None
    n_seeds: int = 3
    theta_ts: float = 0.3
    theta_vd: float = 0.0
    population: int = 6
    generations: Optional[int] = None
    out: Optional[str] = None
    planner: PlannerConfig = field(default_factory=PlannerConfig)
    abstraction: AbstractionConfig = field(default_factory=AbstractionConfig)
    discovery: DiscoveryConfig = field(default_factory=DiscoveryConfig)
    mutation: MutationConfig = field(default_factory=MutationConfig)

    def validate(self) -> "CampaignConfig":
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; choose from {', '.join(METHODS)}")
        if self.archetype not in ARCHETYPES:
            raise ConfigError(f"unknown archetype {self.archetype!r}; choose from {', '.join(ARCHETYPES)}")
        if self.budget < 0:
            raise ConfigError("budget must be >= 0")
        if self.time_budget is not None and self.time_budget <= 0:
            raise ConfigError("time_budget must be positive")
        if self.n_seeds < 1:
            raise ConfigError("need at least one initial seed")
        if not 0.0 <= self.theta_ts <= 1.0 or not 0.0 <= self.theta_vd <= 1.0:
            raise ConfigError("thresholds must lie in [0, 1]")
        if self.population < 1:
            raise ConfigError("population must be >= 1")
        return self

    def with_overrides(self, **kw) -> "CampaignConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw).validate()

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "archetype": self.archetype,
            "method": self.method,
            "seed": self.seed,
            "budget": self.budget,
            "time_budget": self.time_budget,
            "n_seeds": self.n_seeds,
            "theta_ts": self.theta_ts,
            "theta_vd": self.theta_vd,
            "population": self.population,
            "generations": self.generations,
            "out": self.out,
            "planner": self.planner.to_dict(),
            "abstraction": self.abstraction.to_dict(),
            "discovery": self.discovery.to_dict(),
            "mutation": self.mutation.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CampaignConfig":
        d = dict(d)
        if "schema_version" in d:
            check_schema(d, "config")
            d.pop("schema_version")
        try:
            sub = {
                "planner": PlannerConfig.from_dict(d.pop("planner", None)),
                "abstraction": AbstractionConfig.from_dict(d.pop("abstraction", None)),
                "discovery": DiscoveryConfig.from_dict(d.pop("discovery", None)),
                "mutation": MutationConfig.from_dict(d.pop("mutation", None)),
            }
            known = set(cls.__dataclass_fields__)
            unknown = set(d) - known
            if unknown:
                raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
            return cls(**d, **sub).validate()
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"invalid config: {exc}") from exc


def load_config(path: str | Path) -> CampaignConfig:
    try:
        d = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(d, dict):
        raise ConfigError("config must be a JSON object")
    return CampaignConfig.from_dict(d)
