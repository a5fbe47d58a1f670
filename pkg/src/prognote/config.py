"""Pipeline configuration: a small TOML file with flat sections, every
hyperparameter defaulted so a minimal config runs."""
from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .exceptions import ConfigError


@dataclass
class PathsConfig:
    dictionary: str | None = None  # None = bundled starter dictionary
    notes: str = "notes.jsonl"
    outcomes: str = "outcomes.jsonl"
    artifacts: str = "artifacts"


@dataclass
class CohortConfig:
    horizon_days: int = 90
    split: tuple[float, float, float] = (0.7, 0.15, 0.15)
    split_seed: int = 0


@dataclass
class EmbeddingConfig:
    dim: int = 100
    window: int = 5
    negatives: int = 5
    min_count: int = 5
    epochs: int = 5
    lr: float = 0.025
    min_lr: float = 1e-4
    ns_exponent: float = 0.75
    seed: int = 0


@dataclass
class TrainSection:
    hidden_size: int = 64
    lr: float = 0.05
    epochs: int = 30
    grad_clip: float = 5.0
    tbptt_len: int = 32
    init_scale: float = 0.08
    seed: int = 0
    head_input: str = "top"
    y0: float = 0.5
    class_weights: tuple[float, float] | None = None  # None = inverse frequency


@dataclass
class ReportConfig:
    bins: int = 10
    positive: str = "survival"


@dataclass
class PipelineConfig:
    paths: PathsConfig = field(default_factory=PathsConfig)
    cohort: CohortConfig = field(default_factory=CohortConfig)
    embedding: EmbeddingConfig = field(default_factory=EmbeddingConfig)
    train: TrainSection = field(default_factory=TrainSection)
    report: ReportConfig = field(default_factory=ReportConfig)
    base_dir: Path = field(default_factory=Path.cwd)

    def resolve(self, value: str) -> Path:
        path = Path(value)
        return path if path.is_absolute() else self.base_dir / path

    @property
    def notes_path(self) -> Path:
        return self.resolve(self.paths.notes)

    @property
    def outcomes_path(self) -> Path:
        return self.resolve(self.paths.outcomes)

    @property
    def dictionary_path(self) -> Path | None:
        return self.resolve(self.paths.dictionary) if self.paths.dictionary else None

    @property
    def artifacts_dir(self) -> Path:
        return self.resolve(self.paths.artifacts)

    def to_digest_dict(self) -> dict:
        """Config content relevant to reproducibility (no absolute paths)."""
        return {
            "cohort": _section_dict(self.cohort),
            "embedding": _section_dict(self.embedding),
            "train": _section_dict(self.train),
            "report": _section_dict(self.report),
        }

    def digest(self) -> str:
        canonical = json.dumps(self.to_digest_dict(), sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def _section_dict(section) -> dict:
    out = {}
    for f in fields(section):
        value = getattr(section, f.name)
        out[f.name] = list(value) if isinstance(value, tuple) else value
    return out


_SECTIONS = {
    "paths": PathsConfig,
    "cohort": CohortConfig,
    "embedding": EmbeddingConfig,
    "train": TrainSection,
    "report": ReportConfig,
}
_TUPLE_KEYS = {("cohort", "split"), ("train", "class_weights")}


def load_config(path: str | Path) -> PipelineConfig:
    """Parse a TOML config; unknown sections or keys are rejected by name."""
    path = Path(path)
    try:
        with path.open("rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: invalid TOML ({exc})") from None

    cfg = PipelineConfig(base_dir=path.resolve().parent)
    for section_name, values in raw.items():
        if section_name not in _SECTIONS:
            raise ConfigError(
                f"{path}: unknown section [{section_name}] "
                f"(expected one of {sorted(_SECTIONS)})"
            )
        if not isinstance(values, dict):
            raise ConfigError(f"{path}: [{section_name}] must be a table")
        section = getattr(cfg, section_name)
        known = {f.name for f in fields(section)}
        for key, value in values.items():
            if key not in known:
                raise ConfigError(
                    f"{path}: unknown key {key!r} in [{section_name}] "
                    f"(expected one of {sorted(known)})"
                )
            if (section_name, key) in _TUPLE_KEYS and value is not None:
                value = tuple(value)
            setattr(section, key, value)

    for name, p in (("notes", cfg.notes_path), ("outcomes", cfg.outcomes_path)):
        if not p.exists():
            raise ConfigError(f"{path}: [paths] {name} = {p} does not exist")
    if cfg.dictionary_path is not None and not cfg.dictionary_path.exists():
        raise ConfigError(f"{path}: [paths] dictionary = {cfg.dictionary_path} does not exist")
    return cfg
