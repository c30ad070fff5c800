"""Extraction run configuration."""

from __future__ import annotations

from dataclasses import asdict, dataclass

DEFAULT_PROMPT_TEMPLATE = "Summarize: {text}\nSummary:"


@dataclass
class ExtractionConfig:
    """Knobs for one extraction run.

    `samples` is the number of temperature-sampled generations per document,
    `members` the ensemble size realized through distinct dropout seeds, and
    `top_k` the size of the restricted per-position vocabulary kept in the
    emitted token distributions (the remainder goes into the tail-mass entry).
    """

    model: str
    prompt_template: str = DEFAULT_PROMPT_TEMPLATE
    samples: int = 3
    members: int = 2
    temperature: float = 1.0
    top_k: int = 3
    seed: int = 42
    max_new_tokens: int = 16
    device: str = "cpu"

    def __post_init__(self) -> None:
        if self.samples < 0:
            raise ValueError("samples must be >= 0")
        if self.members < 1:
            raise ValueError("members must be >= 1")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        if self.temperature <= 0:
            raise ValueError("temperature must be > 0 for sampling")
        if "{text}" not in self.prompt_template:
            raise ValueError("prompt_template must contain a {text} placeholder")

    def to_dict(self) -> dict:
        return asdict(self)
