"""Run configuration: flat key = value config files plus CLI overrides."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

ALL_METHODS = (
    "MSP",
    "MTE",
    "MCSE",
    "MD",
    "RDE",
    "T-TU",
    "T-RMI",
    "S-TU",
    "S-RMI",
    "P(True)",
    "NumSets",
    "ECC",
    "LexSim",
    "EigV",
)
DEFAULT_NATIVE_METRICS = ("ROUGE-L", "Spearman", "Kendall-Tau")


class ConfigError(ValueError):
    pass


def parse_config_file(path) -> dict[str, str]:
    """Parse a flat `key = value` file; `#` starts a comment, quotes optional."""
    values: dict[str, str] = {}
    for line_no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path} line {line_no}: expected key = value")
        key, _, value = line.partition("=")
        value = value.strip()
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "'\"":
            value = value[1:-1]
        values[key.strip()] = value
    return values


def _split_list(value: str) -> list[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


@dataclass
class RunConfig:
    corpus: Path | None = None
    train_embeddings: Path | None = None
    reference_embeddings: Path | None = None
    p_true_responses: Path | None = None
    methods: list[str] = field(default_factory=lambda: list(ALL_METHODS))
    metrics: list[str] = field(default_factory=lambda: list(DEFAULT_NATIVE_METRICS))
    alpha: int = 1000
    seed: int = 42
    out: Path = Path("uqsum-out")
    set_threshold: float = 0.5
    variance_kept: float = 0.95
    judge_base_url: str | None = None
    judge_api_key: str | None = None
    judge_model: str | None = None
    judge_scale_min: int = 1
    judge_scale_max: int = 5

    def validate(self) -> None:
        if self.alpha < 1:
            raise ConfigError("alpha must be >= 1")
        if not self.methods and not self.metrics:
            raise ConfigError("at least one method or metric must be selected")

    @classmethod
    def from_sources(cls, config_path=None, **overrides) -> "RunConfig":
        """Build from an optional config file; keyword overrides win."""
        raw = parse_config_file(config_path) if config_path else {}
        cfg = cls()
        path_keys = ("corpus", "train_embeddings", "reference_embeddings", "p_true_responses", "out")
        for key in path_keys:
            if key in raw:
                setattr(cfg, key, Path(raw[key]))
        if "methods" in raw:
            cfg.methods = _split_list(raw["methods"])
        if "metrics" in raw:
            cfg.metrics = _split_list(raw["metrics"])
        for key, cast in (
            ("alpha", int),
            ("seed", int),
            ("set_threshold", float),
            ("variance_kept", float),
            ("judge_scale_min", int),
            ("judge_scale_max", int),
        ):
            if key in raw:
                try:
                    setattr(cfg, key, cast(raw[key]))
                except ValueError as exc:
                    raise ConfigError(f"config key {key!r}: {exc}") from exc
        for key in ("judge_base_url", "judge_api_key", "judge_model"):
            if key in raw:
                setattr(cfg, key, raw[key])
        for key, value in overrides.items():
            if value is not None:
                setattr(cfg, key, Path(value) if key in path_keys else value)
        return cfg
