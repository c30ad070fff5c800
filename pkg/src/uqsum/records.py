"""Generation record schema, JSONL ingestion, validation, and score vectors.

All types are treated as immutable after construction and are safe to share
across threads. The JSONL corpus format is the only on-disk record format;
field names match the dataclass attributes exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

DISTRIBUTION_MASS_TOL = 1e-6


class SchemaError(ValueError):
    """Raised when a corpus file or record violates the published schema."""


@dataclass
class TokenDistribution:
    """Per-position ensemble distributions over a shared restricted vocabulary.

    `member_probs[m][k]` is member m's probability of `token_ids[k]`;
    `tail_mass[m]` aggregates the member's remaining probability mass, so each
    member row plus its tail entry sums to 1.
    """

    token_ids: list[int]
    member_probs: list[list[float]]
    tail_mass: list[float]


@dataclass
class EnsembleBlock:
    member_count: int
    token_distributions: list[TokenDistribution]


@dataclass
class SampledGeneration:
    text: str
    token_logprobs: list[float] = field(default_factory=list)
    ensemble_seq_logprobs: list[float] | None = None


@dataclass
class GenerationRecord:
    id: str
    input_text: str
    greedy_text: str
    greedy_token_logprobs: list[float]
    reference_summary: str | None = None
    greedy_token_entropies: list[float] | None = None
    samples: list[SampledGeneration] = field(default_factory=list)
    embedding: list[float] | None = None
    ensemble: EnsembleBlock | None = None


class ScoreKind(str, Enum):
    UNCERTAINTY = "uncertainty"
    NLG = "nlg"
    HUMAN = "human"


@dataclass
class ScoreVector:
    """Named per-sample scores aligned with a record id list.

    `higher_is_better` is True for quality-style scores (nlg, human) and False
    for uncertainty scores.
    """

    name: str
    kind: ScoreKind
    ids: tuple[str, ...]
    values: list[float]
    higher_is_better: bool

    def __post_init__(self) -> None:
        self.ids = tuple(self.ids)
        self.values = [float(v) for v in self.values]
        if len(self.values) != len(self.ids):
            raise SchemaError(
                f"score vector {self.name!r}: {len(self.values)} values for {len(self.ids)} ids"
            )
        if any(math.isnan(v) for v in self.values):
            raise SchemaError(f"score vector {self.name!r} contains NaN")


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _check_logprobs(values, label: str, violations: list[str]) -> None:
    if not isinstance(values, list) or not values:
        violations.append(f"{label}: must be a non-empty list")
        return
    for v in values:
        if not _is_number(v) or math.isnan(v) or v > 0:
            violations.append(f"{label}: every element must be a log-probability <= 0")
            return


def validate_record(record: GenerationRecord, expected_embedding_dim: int | None = None) -> ValidationReport:
    """Check every record invariant; violations are data, not failures.

    `expected_embedding_dim` carries the corpus-wide embedding dimension so a
    single record can be checked against it.
    """
    v: list[str] = []
    if not isinstance(record.id, str) or not record.id:
        v.append("id: must be a non-empty string")
    _check_logprobs(record.greedy_token_logprobs, "greedy_token_logprobs", v)

    if record.greedy_token_entropies is not None:
        ent = record.greedy_token_entropies
        if not isinstance(ent, list):
            v.append("greedy_token_entropies: must be a list")
        elif len(ent) != len(record.greedy_token_logprobs):
            v.append("greedy_token_entropies: length must equal greedy_token_logprobs length")
        elif any(not _is_number(e) or math.isnan(e) or e < 0 for e in ent):
            v.append("greedy_token_entropies: every element must be >= 0")

    for s_idx, sample in enumerate(record.samples):
        if sample.token_logprobs:
            if any(not _is_number(x) or math.isnan(x) or x > 0 for x in sample.token_logprobs):
                v.append(f"samples[{s_idx}].token_logprobs: every element must be <= 0")

    if record.embedding is not None:
        if not record.embedding or any(not _is_number(x) or math.isnan(x) for x in record.embedding):
            v.append("embedding: must be a non-empty list of finite numbers")
        elif expected_embedding_dim is not None and len(record.embedding) != expected_embedding_dim:
            v.append(
                f"embedding dimension: got {len(record.embedding)}, corpus uses {expected_embedding_dim}"
            )

    if record.ensemble is not None:
        _validate_ensemble(record.ensemble, v)
        m = record.ensemble.member_count
        for s_idx, sample in enumerate(record.samples):
            if sample.ensemble_seq_logprobs is not None and len(sample.ensemble_seq_logprobs) != m:
                v.append(
                    f"samples[{s_idx}].ensemble_seq_logprobs: expected {m} member log-probs"
                )
    return ValidationReport(v)


def _validate_ensemble(block: EnsembleBlock, violations: list[str]) -> None:
    if block.member_count < 2:
        violations.append("ensemble.member_count: must be >= 2")
    for p_idx, dist in enumerate(block.token_distributions):
        label = f"ensemble.token_distributions[{p_idx}]"
        if len(dist.member_probs) != block.member_count or len(dist.tail_mass) != block.member_count:
            violations.append(f"{label}: all positions must share member_count members")
            return
        for m_idx, probs in enumerate(dist.member_probs):
            if len(probs) != len(dist.token_ids):
                violations.append(f"{label}: member {m_idx} probability row length mismatch")
                return
            if any(p < 0 for p in probs) or dist.tail_mass[m_idx] < 0:
                violations.append(f"{label}: member {m_idx} has negative probability mass")
                return
            total = sum(probs) + dist.tail_mass[m_idx]
            if abs(total - 1.0) > DISTRIBUTION_MASS_TOL:
                violations.append(
                    f"{label}: distribution mass of member {m_idx} is {total:.8f}, expected 1"
                )
                return


def _record_from_dict(obj: dict, line_no: int) -> GenerationRecord:
    if not isinstance(obj, dict):
        raise SchemaError(f"line {line_no}: expected a JSON object")
    known = {
        "id",
        "input_text",
        "reference_summary",
        "greedy_text",
        "greedy_token_logprobs",
        "greedy_token_entropies",
        "samples",
        "embedding",
        "ensemble",
    }
    unknown = set(obj) - known
    if unknown:
        raise SchemaError(f"line {line_no}: unknown fields {sorted(unknown)}")
    for req in ("id", "input_text", "greedy_text", "greedy_token_logprobs"):
        if req not in obj:
            raise SchemaError(f"line {line_no}: missing required field {req!r}")

    samples = []
    for s_idx, raw in enumerate(obj.get("samples") or []):
        if not isinstance(raw, dict) or "text" not in raw:
            raise SchemaError(f"line {line_no}: samples[{s_idx}] must be an object with a text field")
        samples.append(
            SampledGeneration(
                text=raw["text"],
                token_logprobs=list(raw.get("token_logprobs") or []),
                ensemble_seq_logprobs=(
                    list(raw["ensemble_seq_logprobs"])
                    if raw.get("ensemble_seq_logprobs") is not None
                    else None
                ),
            )
        )

    ensemble = None
    raw_ens = obj.get("ensemble")
    if raw_ens is not None:
        if not isinstance(raw_ens, dict) or "member_count" not in raw_ens:
            raise SchemaError(f"line {line_no}: ensemble must be an object with member_count")
        dists = []
        for p_idx, raw_dist in enumerate(raw_ens.get("token_distributions") or []):
            try:
                dists.append(
                    TokenDistribution(
                        token_ids=list(raw_dist["token_ids"]),
                        member_probs=[list(row) for row in raw_dist["member_probs"]],
                        tail_mass=list(raw_dist["tail_mass"]),
                    )
                )
            except (KeyError, TypeError) as exc:
                raise SchemaError(
                    f"line {line_no}: ensemble.token_distributions[{p_idx}] malformed ({exc})"
                ) from exc
        ensemble = EnsembleBlock(member_count=int(raw_ens["member_count"]), token_distributions=dists)

    return GenerationRecord(
        id=obj["id"],
        input_text=obj["input_text"],
        reference_summary=obj.get("reference_summary"),
        greedy_text=obj["greedy_text"],
        greedy_token_logprobs=list(obj["greedy_token_logprobs"]),
        greedy_token_entropies=(
            list(obj["greedy_token_entropies"]) if obj.get("greedy_token_entropies") is not None else None
        ),
        samples=samples,
        embedding=list(obj["embedding"]) if obj.get("embedding") is not None else None,
        ensemble=ensemble,
    )


def parse_record_file(path) -> list[GenerationRecord]:
    """Read a JSONL corpus, one record per line, validating every record.

    Raises SchemaError naming the line for malformed JSON, duplicate ids, or
    any invariant violation; the corpus-wide embedding dimension is fixed by
    the first record that carries an embedding.
    """
    path = Path(path)
    records: list[GenerationRecord] = []
    seen: set[str] = set()
    embedding_dim: int | None = None
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{path.name} line {line_no}: malformed JSON ({exc.msg})") from exc
            record = _record_from_dict(obj, line_no)
            if record.id in seen:
                raise SchemaError(f"{path.name} line {line_no}: duplicate id {record.id!r}")
            seen.add(record.id)
            report = validate_record(record, expected_embedding_dim=embedding_dim)
            if not report.ok:
                raise SchemaError(
                    f"{path.name} line {line_no}: invalid record {record.id!r}: "
                    + "; ".join(report.violations)
                )
            if embedding_dim is None and record.embedding is not None:
                embedding_dim = len(record.embedding)
            records.append(record)
    return records


def record_to_dict(record: GenerationRecord) -> dict:
    """Serialize a record to the JSONL object form, omitting absent optionals."""
    obj: dict = {
        "id": record.id,
        "input_text": record.input_text,
        "greedy_text": record.greedy_text,
        "greedy_token_logprobs": record.greedy_token_logprobs,
    }
    if record.reference_summary is not None:
        obj["reference_summary"] = record.reference_summary
    if record.greedy_token_entropies is not None:
        obj["greedy_token_entropies"] = record.greedy_token_entropies
    if record.samples:
        obj["samples"] = [
            {
                "text": s.text,
                "token_logprobs": s.token_logprobs,
                **(
                    {"ensemble_seq_logprobs": s.ensemble_seq_logprobs}
                    if s.ensemble_seq_logprobs is not None
                    else {}
                ),
            }
            for s in record.samples
        ]
    if record.embedding is not None:
        obj["embedding"] = record.embedding
    if record.ensemble is not None:
        obj["ensemble"] = {
            "member_count": record.ensemble.member_count,
            "token_distributions": [
                {
                    "token_ids": d.token_ids,
                    "member_probs": d.member_probs,
                    "tail_mass": d.tail_mass,
                }
                for d in record.ensemble.token_distributions
            ],
        }
    return obj


def write_record_file(records: Iterable[GenerationRecord], path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record_to_dict(record)) + "\n")


def corpus_ids(records: Sequence[GenerationRecord]) -> tuple[str, ...]:
    return tuple(r.id for r in records)
