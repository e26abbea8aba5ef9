from __future__ import annotations

import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

import yaml


@dataclass
class PathsConfig:
    output_dir: str = "artifacts/runs"
    logs_dir: str = "artifacts/logs"
    manifests_dir: str = "artifacts/manifests"
    traces_dir: str = "artifacts/traces"
    metrics_file: str = "artifacts/metrics.prom"


@dataclass
class LimitsConfig:
    exhaustive_n: int = 6
    distance_n: int = 7
    explicit_n: int = 8
    lazy_n: int = 16
    max_edges_examined: int = 5_000_000


@dataclass
class SamplingConfig:
    cutoff_exponent: int = 4
    default_trials: int = 10
    tolerance: float = 1e-12


@dataclass
class BranchingConfig:
    population_cap: int = 10_000
    max_generations: int = 200
    block_size: int = 1000


@dataclass
class RuntimeConfig:
    threads: int = -1
    backend: str = "threads"


@dataclass
class MonitoringConfig:
    log_level: str = "INFO"
    enable_metrics: bool = True


@dataclass
class Settings:
    paths: PathsConfig = field(default_factory=PathsConfig)
    limits: LimitsConfig = field(default_factory=LimitsConfig)
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    branching: BranchingConfig = field(default_factory=BranchingConfig)
    runtime: RuntimeConfig = field(default_factory=RuntimeConfig)
    monitoring: MonitoringConfig = field(default_factory=MonitoringConfig)

    @classmethod
    def load(cls, config_path: Optional[str] = None) -> Settings:
        if config_path is None:
            config_path = os.getenv("RRG_SETTINGS", "config/settings.yaml")

        config_file = Path(config_path)
        if not config_file.exists():
            return cls()

        with open(config_file, "r") as f:
            data = yaml.safe_load(f) or {}

        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> Settings:
        return Settings(
            paths=PathsConfig(**data.get("paths", {})),
            limits=LimitsConfig(**data.get("limits", {})),
            sampling=SamplingConfig(**data.get("sampling", {})),
            branching=BranchingConfig(**data.get("branching", {})),
            runtime=RuntimeConfig(**data.get("runtime", {})),
            monitoring=MonitoringConfig(**data.get("monitoring", {})),
        )

    def apply_overrides(self, overrides: Mapping[str, Any]) -> Settings:
        """Apply dotted ``section.key`` overrides, casting to the field's current type."""
        for dotted, value in overrides.items():
            section_name, _, key = dotted.partition(".")
            section = getattr(self, section_name, None)
            if section is None or key not in {f.name for f in fields(section)}:
                raise KeyError(f"Unknown setting: {dotted}")
            current = getattr(section, key)
            if isinstance(current, bool) and isinstance(value, str):
                value = value.strip().lower() in ("1", "true", "yes", "on")
            elif current is not None and not isinstance(value, type(current)):
                value = type(current)(value)
            setattr(section, key, value)
        return self

    def cutoff_for(self, n: int) -> int:
        return n ** self.sampling.cutoff_exponent

    def ensure_directories(self) -> None:
        for path_attr in ["output_dir", "logs_dir", "manifests_dir", "traces_dir", "metrics_file"]:
            path = Path(getattr(self.paths, path_attr))
            if path_attr == "metrics_file":
                path = path.parent
            path.mkdir(parents=True, exist_ok=True)
