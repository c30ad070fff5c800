"""Validator for the published generation-record JSONL contract.

This re-implements the schema rules on the producer side so the extractor can
check its own output without depending on the consumer package; the wire
format (field names and invariants) is the contract between the two.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

MASS_TOL = 1e-6

REQUIRED_FIELDS = ("id", "input_text", "greedy_text", "greedy_token_logprobs")
KNOWN_FIELDS = REQUIRED_FIELDS + (
    "reference_summary",
    "greedy_token_entropies",
    "samples",
    "embedding",
    "ensemble",
)


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and not math.isnan(value)


def validate_record_object(obj, embedding_dim: int | None = None) -> list[str]:
    """Return every schema violation of one JSONL record object."""
    if not isinstance(obj, dict):
        return ["record must be a JSON object"]
    violations = []
    for name in REQUIRED_FIELDS:
        if name not in obj:
            violations.append(f"missing required field {name}")
    unknown = set(obj) - set(KNOWN_FIELDS)
    if unknown:
        violations.append(f"unknown fields {sorted(unknown)}")
    if violations:
        return violations

    lps = obj["greedy_token_logprobs"]
    if not isinstance(lps, list) or not lps or any(not _is_number(v) or v > 0 for v in lps):
        violations.append("greedy_token_logprobs must be a non-empty list of values <= 0")

    entropies = obj.get("greedy_token_entropies")
    if entropies is not None:
        if not isinstance(entropies, list) or len(entropies) != len(lps):
            violations.append("greedy_token_entropies length must match greedy_token_logprobs")
        elif any(not _is_number(v) or v < 0 for v in entropies):
            violations.append("greedy_token_entropies must be >= 0")

    for s_idx, sample in enumerate(obj.get("samples") or []):
        if not isinstance(sample, dict) or "text" not in sample:
            violations.append(f"samples[{s_idx}] must be an object with a text field")
            continue
        for v in sample.get("token_logprobs") or []:
            if not _is_number(v) or v > 0:
                violations.append(f"samples[{s_idx}].token_logprobs must be <= 0")
                break

    embedding = obj.get("embedding")
    if embedding is not None:
        if not isinstance(embedding, list) or not embedding or any(not _is_number(v) for v in embedding):
            violations.append("embedding must be a non-empty numeric list")
        elif embedding_dim is not None and len(embedding) != embedding_dim:
            violations.append(f"embedding dimension {len(embedding)} differs from corpus dimension {embedding_dim}")

    ensemble = obj.get("ensemble")
    if ensemble is not None:
        violations.extend(_validate_ensemble(ensemble, obj.get("samples") or []))
    return violations


def _validate_ensemble(ensemble, samples) -> list[str]:
    if not isinstance(ensemble, dict) or "member_count" not in ensemble:
        return ["ensemble must be an object with member_count"]
    violations = []
    m = ensemble["member_count"]
    if not isinstance(m, int) or m < 2:
        violations.append("ensemble.member_count must be an integer >= 2")
        return violations
    for p_idx, dist in enumerate(ensemble.get("token_distributions") or []):
        label = f"ensemble.token_distributions[{p_idx}]"
        rows = dist.get("member_probs")
        tails = dist.get("tail_mass")
        ids = dist.get("token_ids")
        if not isinstance(rows, list) or not isinstance(tails, list) or not isinstance(ids, list):
            violations.append(f"{label} must carry token_ids, member_probs, tail_mass")
            return violations
        if len(rows) != m or len(tails) != m:
            violations.append(f"{label} must have {m} member rows and tail entries")
            return violations
        for m_idx, row in enumerate(rows):
            if len(row) != len(ids):
                violations.append(f"{label} member {m_idx} row length differs from token_ids")
                return violations
            if any(not _is_number(p) or p < 0 for p in row) or not _is_number(tails[m_idx]) or tails[m_idx] < 0:
                violations.append(f"{label} member {m_idx} has negative or non-numeric mass")
                return violations
            total = sum(row) + tails[m_idx]
            if abs(total - 1.0) > MASS_TOL:
                violations.append(f"{label} member {m_idx} mass is {total!r}, expected 1")
    for s_idx, sample in enumerate(samples):
        member_lps = sample.get("ensemble_seq_logprobs")
        if member_lps is not None and len(member_lps) != m:
            violations.append(f"samples[{s_idx}].ensemble_seq_logprobs must have {m} entries")
    return violations


@dataclass
class SelfCheckReport:
    total: int = 0
    invalid: dict[int, list[str]] = field(default_factory=dict)
    with_samples: int = 0
    with_embedding: int = 0
    with_ensemble: int = 0
    with_entropies: int = 0

    @property
    def ok(self) -> bool:
        return self.total > 0 and not self.invalid

    def coverage_lines(self) -> list[str]:
        def frac(count: int) -> str:
            return f"{count}/{self.total} ({count / self.total:.0%})" if self.total else "0/0"

        return [
            f"records: {self.total}",
            f"with samples: {frac(self.with_samples)}",
            f"with embedding: {frac(self.with_embedding)}",
            f"with ensemble: {frac(self.with_ensemble)}",
            f"with token entropies: {frac(self.with_entropies)}",
        ]


def self_check(path) -> SelfCheckReport:
    """Re-validate every line of an emitted JSONL file and tally field coverage."""
    report = SelfCheckReport()
    embedding_dim: int | None = None
    seen_ids: set[str] = set()
    with Path(path).open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            report.total += 1
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                report.invalid[line_no] = [f"malformed JSON: {exc.msg}"]
                continue
            violations = validate_record_object(obj, embedding_dim=embedding_dim)
            rid = obj.get("id") if isinstance(obj, dict) else None
            if isinstance(rid, str):
                if rid in seen_ids:
                    violations.append(f"duplicate id {rid!r}")
                seen_ids.add(rid)
            if violations:
                report.invalid[line_no] = violations
                continue
            if embedding_dim is None and obj.get("embedding") is not None:
                embedding_dim = len(obj["embedding"])
            if obj.get("samples"):
                report.with_samples += 1
            if obj.get("embedding") is not None:
                report.with_embedding += 1
            if obj.get("ensemble") is not None:
                report.with_ensemble += 1
            if obj.get("greedy_token_entropies") is not None:
                report.with_entropies += 1
    return report
