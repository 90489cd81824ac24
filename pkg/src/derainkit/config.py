"""JSON run configuration: one document covering the pipeline, filter,
streak synthesis, training, and dataset/output paths.

Unknown keys are rejected and all referenced paths are checked before any
work starts, so a typo fails fast instead of half-writing artifacts.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .filters import FilterParams
from .model import PipelineConfig, TrainConfig
from .rain import StreakParams


class ConfigError(ValueError):
    """Invalid run configuration (bad key, type, or value)."""


@dataclass
class SynthConfig:
    pairs: int = 20
    width: int = 64
    height: int = 64

    def __post_init__(self):
        if self.pairs < 0:
            raise ConfigError("synth.pairs must be >= 0")
        if self.width < 1 or self.height < 1:
            raise ConfigError("synth dimensions must be >= 1")


@dataclass
class RunConfig:
    seed: int = 0
    feature_channels: int = 8
    reduction: int = 4
    use_iwgif: bool = True
    use_feature_net: bool = True
    use_derb: bool = True
    filter: FilterParams = field(default_factory=lambda: FilterParams(zeta=3, lam=1e-2))
    streaks: StreakParams = field(
        default_factory=lambda: StreakParams(count=25, intensity=0.5)
    )
    synth: SynthConfig = field(default_factory=SynthConfig)
    train: TrainConfig = field(
        default_factory=lambda: TrainConfig(batch=8, crop=32, total_steps=200)
    )
    rainy_dir: str | None = None
    clean_dir: str | None = None

    def pipeline(self) -> PipelineConfig:
        return PipelineConfig(
            feature_channels=self.feature_channels,
            reduction=self.reduction,
            use_iwgif=self.use_iwgif,
            use_feature_net=self.use_feature_net,
            use_derb=self.use_derb,
            filter_params=self.filter,
            train=TrainConfig(**{**_public_fields(self.train), "seed": self.seed}),
        )

    def streak_params(self, seed: int) -> StreakParams:
        return StreakParams(**{**_public_fields(self.streaks), "seed": seed})


def _public_fields(obj) -> dict:
    return asdict(obj)


_SECTIONS = {
    "filter": FilterParams,
    "streaks": StreakParams,
    "synth": SynthConfig,
    "train": TrainConfig,
}
# per-run seeds come from the top-level "seed" (or --seed), never a section
_HIDDEN = {"streaks": {"seed"}, "train": {"seed"}}


def _build_section(name: str, cls, data: dict):
    if not isinstance(data, dict):
        raise ConfigError(f"config section {name!r} must be an object")
    allowed = {f.name for f in fields(cls)} - _HIDDEN.get(name, set())
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown key {sorted(unknown)[0]!r} in config section {name!r}")
    try:
        return cls(**data)
    except ValueError as e:
        raise ConfigError(f"config section {name!r}: {e}") from e


def from_dict(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    allowed = {f.name for f in fields(RunConfig)}
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown config key {sorted(unknown)[0]!r}")
    kwargs = {}
    for key, value in data.items():
        if key in _SECTIONS:
            kwargs[key] = _build_section(key, _SECTIONS[key], value)
        else:
            kwargs[key] = value
    for key in ("seed", "feature_channels", "reduction"):
        if key in kwargs and not isinstance(kwargs[key], int):
            raise ConfigError(f"config key {key!r} must be an integer")
    for key in ("use_iwgif", "use_feature_net", "use_derb"):
        if key in kwargs and not isinstance(kwargs[key], bool):
            raise ConfigError(f"config key {key!r} must be a boolean")
    for key in ("rainy_dir", "clean_dir"):
        if key in kwargs and not (kwargs[key] is None or isinstance(kwargs[key], str)):
            raise ConfigError(f"config key {key!r} must be a string path")
    cfg = RunConfig(**kwargs)
    if cfg.feature_channels < 1 or cfg.reduction < 1:
        raise ConfigError("feature_channels and reduction must be >= 1")
    if cfg.feature_channels % cfg.reduction != 0:
        raise ConfigError("feature_channels must be divisible by reduction")
    return cfg


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise FileNotFoundError(f"cannot read config file {path}: {e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file {path} is not valid JSON: {e}") from e
    return from_dict(data)


def check_dataset_paths(cfg: RunConfig) -> tuple[Path, Path]:
    """Validate that both dataset directories are set and exist."""
    if cfg.rainy_dir is None or cfg.clean_dir is None:
        raise ConfigError("config must set rainy_dir and clean_dir")
    rainy, clean = Path(cfg.rainy_dir), Path(cfg.clean_dir)
    for p in (rainy, clean):
        if not p.is_dir():
            raise FileNotFoundError(f"dataset directory not found: {p}")
    return rainy, clean


def default_toy_config() -> RunConfig:
    """The frozen toy recipe: 20 smooth 64x64 scenes with heavy streaks,
    an 8-channel model trained for 200 steps on 32x32 crops."""
    return RunConfig()
