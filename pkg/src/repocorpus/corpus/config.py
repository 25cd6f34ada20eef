"""One versioned, validated configuration document for every stage."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from ..analysis import FrontendConfig
from ..cpt import CptConfig
from ..graph import RelationKind
from ..llm import GatewayConfig
from ..sft.composition import TaskFormat

CONFIG_VERSION = 1


class ConfigError(ValueError):
    pass


@dataclass
class RelationConfig:
    kinds: list[str] = field(default_factory=lambda: ["call", "contain", "include", "dependency"])
    per_kind_cap: int | None = None
    n1: int = 5
    n2: int = 1

    def __post_init__(self) -> None:
        for k in self.kinds:
            RelationKind(k)
        if self.n1 < 0 or self.n2 < 0:
            raise ValueError("n1 and n2 must be >= 0")
        if self.per_kind_cap is not None and self.per_kind_cap < 1:
            raise ValueError("per_kind_cap must be >= 1")


@dataclass
class CompositionConfig:
    formats: list[str] = field(default_factory=lambda: ["question_answer", "fill_in_blank", "programming"])
    difficulty: list[int] = field(default_factory=lambda: [1, 4])
    max_combinations: int | None = None

    def __post_init__(self) -> None:
        self.formats = [TaskFormat.parse(f).value for f in self.formats]
        if len(self.difficulty) != 2 or not 1 <= self.difficulty[0] <= self.difficulty[1]:
            raise ValueError("difficulty must be [lo, hi] with 1 <= lo <= hi")


@dataclass
class SandboxSettings:
    cxx: str = "g++"
    cxx_flags: list[str] = field(default_factory=lambda: ["-std=c++17", "-O0", "-w"])
    python: str = "python3"
    wall_seconds: float = 60.0
    output_bytes: int = 64 * 1024 * 1024
    workers: int = 2

    def __post_init__(self) -> None:
        if self.wall_seconds <= 0 or self.output_bytes <= 0 or self.workers < 1:
            raise ValueError("sandbox limits must be positive")


@dataclass
class UtilizationConfig:
    max_repair_iters: int = 3
    sandbox: SandboxSettings = field(default_factory=SandboxSettings)

    def __post_init__(self) -> None:
        if isinstance(self.sandbox, dict):
            self.sandbox = SandboxSettings(**self.sandbox)
        if self.max_repair_iters < 0:
            raise ValueError("max_repair_iters must be >= 0")


@dataclass
class MixConfig:
    """General-domain data mixed into the final corpora; paths may be null."""

    general_cpt: str | None = None
    general_sft: str | None = None
    sft_ratio: float = 0.0

    def __post_init__(self) -> None:
        if not 0 <= self.sft_ratio < 1:
            raise ValueError("sft_ratio must be in [0, 1)")


@dataclass
class PipelineConfig:
    version: int = CONFIG_VERSION
    seed: int = 0
    frontend: FrontendConfig = field(default_factory=lambda: FrontendConfig("cpp"))
    cpt: CptConfig = field(default_factory=CptConfig)
    gateway: GatewayConfig = field(default_factory=GatewayConfig)
    relation: RelationConfig = field(default_factory=RelationConfig)
    composition: CompositionConfig = field(default_factory=CompositionConfig)
    utilization: UtilizationConfig = field(default_factory=UtilizationConfig)
    mix: MixConfig = field(default_factory=MixConfig)
    # reference scales only, never used as defaults
    targets: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["cpt"]["pointer_mode"] = self.cpt.pointer_mode.value
        return d

    @property
    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode("utf-8")).hexdigest()


SECTIONS = {
    "frontend": FrontendConfig,
    "cpt": CptConfig,
    "gateway": GatewayConfig,
    "relation": RelationConfig,
    "composition": CompositionConfig,
    "utilization": UtilizationConfig,
    "mix": MixConfig,
}


def _build(cls, data, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected a mapping")
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {unknown}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def config_from_dict(data: dict) -> PipelineConfig:
    """Validate a parsed document. Every section is optional."""
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    version = data.get("version", CONFIG_VERSION)
    if version != CONFIG_VERSION:
        raise ConfigError(f"unsupported config version {version!r}")
    unknown = sorted(set(data) - set(SECTIONS) - {"version", "seed", "targets"})
    if unknown:
        raise ConfigError(f"unknown top-level keys {unknown}")
    kw = {name: _build(cls, data[name], name) for name, cls in SECTIONS.items() if name in data}
    seed = data.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError("seed must be an integer")
    targets = data.get("targets", {}) or {}
    if not isinstance(targets, dict) or not all(isinstance(v, int) and v >= 0 for v in targets.values()):
        raise ConfigError("targets must map names to non-negative integers")
    return PipelineConfig(version=version, seed=seed, targets=dict(targets), **kw)


def load_config(path: str | os.PathLike | None) -> PipelineConfig:
    """Read YAML or JSON (by content; JSON is valid YAML). ``None`` gives defaults."""
    if path is None:
        return PipelineConfig()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML/JSON: {exc}") from exc
    return config_from_dict(data)
