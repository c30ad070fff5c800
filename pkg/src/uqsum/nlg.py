"""Natively computed quality metrics, score ingestion, and judge prompt batches.

ROUGE-L and the embedding rank correlations are computed here; scores from
model-based metrics are ingested from id -> score JSONL files; prompt batches
for LLM judging are emitted to JSON and their responses parsed back.
"""

from __future__ import annotations

import json
import logging
import math
import re
import string
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

from uqsum.records import GenerationRecord, SchemaError, ScoreKind, ScoreVector

logger = logging.getLogger(__name__)

_PUNCT = string.punctuation


def tokenize(text: str) -> list[str]:
    """Lowercase, split on whitespace, strip surrounding punctuation.

    The rule is fixed so lexical scores are reproducible bit-exactly.
    """
    tokens = []
    for raw in text.lower().split():
        token = raw.strip(_PUNCT)
        if token:
            tokens.append(token)
    return tokens


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    # Rolling single-row dynamic program.
    if not a or not b:
        return 0
    previous = [0] * (len(b) + 1)
    for token_a in a:
        current = [0] * (len(b) + 1)
        for j, token_b in enumerate(b, start=1):
            if token_a == token_b:
                current[j] = previous[j - 1] + 1
            else:
                current[j] = max(previous[j], current[j - 1])
        previous = current
    return previous[-1]


def rouge_l_tokens(candidate: Sequence[str], reference: Sequence[str]) -> float:
    """LCS-based F1 over already-tokenized texts."""
    if not candidate or not reference:
        return 0.0
    lcs = _lcs_length(candidate, reference)
    if lcs == 0:
        return 0.0
    precision = lcs / len(candidate)
    recall = lcs / len(reference)
    return 2 * precision * recall / (precision + recall)


def rouge_l(candidate: str, reference: str) -> float:
    """ROUGE-L F1 = 2PR/(P+R) with P, R from the longest common subsequence."""
    return rouge_l_tokens(tokenize(candidate), tokenize(reference))


class UndefinedCorrelationError(ValueError):
    """A rank correlation whose tie-corrected denominator vanishes."""


def average_ranks(values) -> list[float]:
    """1-based ranks with ties assigned the group-average rank."""
    order = sorted(range(len(values)), key=lambda i: (values[i], i))
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mean_rank = (i + j) / 2 + 1
        for pos in range(i, j + 1):
            ranks[order[pos]] = mean_rank
        i = j + 1
    return ranks


def _pearson(x: Sequence[float], y: Sequence[float]) -> float:
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    dx = [v - mx for v in x]
    dy = [v - my for v in y]
    sxx = sum(v * v for v in dx)
    syy = sum(v * v for v in dy)
    if sxx == 0 or syy == 0:
        raise UndefinedCorrelationError("correlation undefined for a constant vector")
    sxy = sum(a * b for a, b in zip(dx, dy))
    return sxy / math.sqrt(sxx * syy)


def rank_correlation(x, y, kind: str = "spearman") -> float:
    """Spearman (Pearson of average ranks) or Kendall tau-b rank correlation."""
    x = list(x)
    y = list(y)
    if len(x) != len(y):
        raise ValueError("vectors must have equal length")
    if len(x) < 2:
        raise ValueError("rank correlation needs at least 2 observations")
    if kind == "spearman":
        return _pearson(average_ranks(x), average_ranks(y))
    if kind == "kendall":
        concordant = discordant = ties_x = ties_y = 0
        n = len(x)
        for i in range(n):
            for j in range(i + 1, n):
                dx = (x[i] > x[j]) - (x[i] < x[j])
                dy = (y[i] > y[j]) - (y[i] < y[j])
                if dx == 0:
                    ties_x += 1
                if dy == 0:
                    ties_y += 1
                if dx != 0 and dy != 0:
                    if dx == dy:
                        concordant += 1
                    else:
                        discordant += 1
        n0 = n * (n - 1) // 2
        denom_sq = (n0 - ties_x) * (n0 - ties_y)
        if denom_sq == 0:
            raise UndefinedCorrelationError("tau-b undefined for a constant vector")
        return (concordant - discordant) / math.sqrt(denom_sq)
    raise ValueError(f"unknown correlation kind {kind!r}")


def embedding_semantic_overlap(gen_embedding, ref_embedding, kind: str = "spearman") -> float:
    """Rank correlation between the coordinates of two embedding vectors."""
    gen = list(gen_embedding)
    ref = list(ref_embedding)
    if len(gen) != len(ref):
        raise ValueError("embeddings must share dimension")
    if len(gen) < 2:
        raise ValueError("embedding overlap needs dimension >= 2")
    return rank_correlation(gen, ref, kind=kind)


class Dimension(str, Enum):
    RELEVANCE = "relevance"
    CONSISTENCY = "consistency"
    COHERENCE = "coherence"
    FLUENCY = "fluency"
    OVERALL = "overall"


class MetricSource(str, Enum):
    NATIVE = "native"
    INGESTED = "ingested"
    JUDGE = "judge"


class TargetSource(str, Enum):
    GROUND_TRUTH = "ground_truth"
    INPUT_TEXT = "input_text"
    BOTH = "both"
    NONE = "none"


@dataclass
class MetricDescriptor:
    name: str
    dimension: Dimension
    source: MetricSource
    target_source: TargetSource = TargetSource.NONE


NATIVE_METRICS = {
    "ROUGE-L": MetricDescriptor("ROUGE-L", Dimension.RELEVANCE, MetricSource.NATIVE, TargetSource.GROUND_TRUTH),
    "Spearman": MetricDescriptor("Spearman", Dimension.RELEVANCE, MetricSource.NATIVE, TargetSource.GROUND_TRUTH),
    "Kendall-Tau": MetricDescriptor("Kendall-Tau", Dimension.RELEVANCE, MetricSource.NATIVE, TargetSource.GROUND_TRUTH),
}


def ingest_metric_scores(path, descriptor: MetricDescriptor, ids: Sequence[str]) -> ScoreVector:
    """Read an id -> score JSONL file and align it to the corpus id order.

    Unknown ids, duplicates, non-numeric scores, and missing ids all raise.
    """
    path = Path(path)
    wanted = set(ids)
    scores: dict[str, float] = {}
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{path.name} line {line_no}: malformed JSON ({exc.msg})") from exc
            if not isinstance(obj, dict) or "id" not in obj or "score" not in obj:
                raise SchemaError(f"{path.name} line {line_no}: expected an object with id and score")
            rid = obj["id"]
            if rid not in wanted:
                raise SchemaError(f"{path.name} line {line_no}: unknown id {rid!r}")
            if rid in scores:
                raise SchemaError(f"{path.name} line {line_no}: duplicate id {rid!r}")
            score = obj["score"]
            if not isinstance(score, (int, float)) or isinstance(score, bool) or math.isnan(score):
                raise SchemaError(f"{path.name} line {line_no}: non-numeric score for id {rid!r}")
            scores[rid] = float(score)
    missing = [rid for rid in ids if rid not in scores]
    if missing:
        raise SchemaError(f"{path.name}: missing scores for ids {missing}")
    return ScoreVector(
        name=descriptor.name,
        kind=ScoreKind.NLG,
        ids=tuple(ids),
        values=[scores[rid] for rid in ids],
        higher_is_better=True,
    )


class JudgeVariant(str, Enum):
    WO = "wo"
    WI_GT = "wi_gt"
    WI_IN = "wi_in"
    WI_INGT = "wi_ingt"


# Stand-in definitions for the judged dimensions; the batch header records
# whatever the run actually used, so ingestion stays unambiguous.
DEFAULT_DIMENSION_DEFINITIONS: dict[Dimension, str] = {
    Dimension.RELEVANCE: "the summary keeps only the important information from the source text",
    Dimension.CONSISTENCY: "every claim in the summary is factually supported by the source text",
    Dimension.COHERENCE: "the sentences of the summary fit together into one well-organized body",
    Dimension.FLUENCY: "each individual sentence of the summary is well-formed and readable",
    Dimension.OVERALL: "the summary is of high quality considering relevance, consistency, coherence, and fluency",
}


@dataclass
class JudgeTemplateConfig:
    scale_min: int = 1
    scale_max: int = 5
    definitions: Mapping[Dimension, str] = field(default_factory=lambda: dict(DEFAULT_DIMENSION_DEFINITIONS))


@dataclass
class JudgePromptBatch:
    variant: JudgeVariant
    dimension: Dimension
    items: list[tuple[str, str]]
    scale: tuple[int, int]

    @property
    def metric_name(self) -> str:
        return f"{self.variant.value.replace('_', '-')}-judge ({self.dimension.value.title()})"


_VARIANT_NEEDS = {
    JudgeVariant.WO: ("reference_summary",),
    JudgeVariant.WI_GT: ("reference_summary",),
    JudgeVariant.WI_IN: ("input_text",),
    JudgeVariant.WI_INGT: ("reference_summary", "input_text"),
}


def _render_prompt(
    record: GenerationRecord,
    variant: JudgeVariant,
    dimension: Dimension,
    config: JudgeTemplateConfig,
) -> str:
    lines = [f"You are grading the {dimension.value} of a machine-written summary."]
    if variant is not JudgeVariant.WO:
        lines.append(f"Here, {dimension.value} means: {config.definitions[dimension]}.")
    if variant in (JudgeVariant.WI_IN, JudgeVariant.WI_INGT):
        lines.append("Source text:")
        lines.append(record.input_text)
    if variant in (JudgeVariant.WO, JudgeVariant.WI_GT, JudgeVariant.WI_INGT):
        lines.append("Reference summary:")
        lines.append(record.reference_summary or "")
    lines.append("Candidate summary:")
    lines.append(record.greedy_text)
    lines.append(
        f"Rate the candidate's {dimension.value} with one integer from "
        f"{config.scale_min} (worst) to {config.scale_max} (best). Reply with the integer only."
    )
    return "\n".join(lines)


def emit_judge_prompts(
    records: Sequence[GenerationRecord],
    variant: JudgeVariant,
    dimension: Dimension,
    config: JudgeTemplateConfig | None = None,
    path=None,
) -> JudgePromptBatch:
    """Render one prompt per record; optionally serialize the batch to JSON."""
    config = config or JudgeTemplateConfig()
    ids = [r.id for r in records]
    if len(set(ids)) != len(ids):
        raise SchemaError("records passed to emit_judge_prompts must have unique ids")
    needed = _VARIANT_NEEDS[variant]
    lacking = [
        r.id
        for r in records
        if ("reference_summary" in needed and not r.reference_summary)
        or ("input_text" in needed and not r.input_text)
    ]
    if lacking:
        raise SchemaError(f"variant {variant.value} needs {needed} on every record; missing for ids {lacking}")
    items = [(r.id, _render_prompt(r, variant, dimension, config)) for r in records]
    batch = JudgePromptBatch(
        variant=variant,
        dimension=dimension,
        items=items,
        scale=(config.scale_min, config.scale_max),
    )
    if path is not None:
        write_judge_batch(batch, path)
    return batch


def write_judge_batch(batch: JudgePromptBatch, path) -> None:
    payload = {
        "variant": batch.variant.value,
        "dimension": batch.dimension.value,
        "scale": {"min": batch.scale[0], "max": batch.scale[1]},
        "items": [{"id": rid, "prompt": prompt} for rid, prompt in batch.items],
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load_judge_batch(path) -> JudgePromptBatch:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return JudgePromptBatch(
        variant=JudgeVariant(payload["variant"]),
        dimension=Dimension(payload["dimension"]),
        items=[(item["id"], item["prompt"]) for item in payload["items"]],
        scale=(int(payload["scale"]["min"]), int(payload["scale"]["max"])),
    )


@dataclass
class JudgeParseResult:
    scores: ScoreVector
    unparseable: list[tuple[str, str]]


_INT_RE = re.compile(r"-?\d+")

MAX_UNPARSEABLE_FRACTION = 0.10


def _first_in_scale_integer(reply: str, lo: int, hi: int) -> int | None:
    for match in _INT_RE.finditer(reply):
        value = int(match.group())
        if lo <= value <= hi:
            return value
    return None


def parse_judge_responses(path, batch: JudgePromptBatch) -> JudgeParseResult:
    """Extract in-scale integer scores from raw replies, rescaled to [0, 1].

    Replies without an in-scale integer (and batch ids with no reply at all)
    land on the rejection list; more than 10% unparseable is a hard error.
    """
    path = Path(path)
    lo, hi = batch.scale
    batch_ids = [rid for rid, _ in batch.items]
    wanted = set(batch_ids)
    replies: dict[str, str] = {}
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{path.name} line {line_no}: malformed JSON ({exc.msg})") from exc
            if not isinstance(obj, dict) or "id" not in obj or "reply" not in obj:
                raise SchemaError(f"{path.name} line {line_no}: expected an object with id and reply")
            rid = obj["id"]
            if rid not in wanted:
                raise SchemaError(f"{path.name} line {line_no}: unknown id {rid!r}")
            replies[rid] = str(obj["reply"])

    parsed: dict[str, float] = {}
    unparseable: list[tuple[str, str]] = []
    for rid in batch_ids:
        if rid not in replies:
            unparseable.append((rid, "no reply"))
            continue
        value = _first_in_scale_integer(replies[rid], lo, hi)
        if value is None:
            unparseable.append((rid, f"no integer in [{lo}, {hi}]: {replies[rid]!r}"))
        else:
            parsed[rid] = (value - lo) / (hi - lo)

    if len(unparseable) > MAX_UNPARSEABLE_FRACTION * len(batch_ids):
        raise SchemaError(
            f"{path.name}: {len(unparseable)}/{len(batch_ids)} replies unparseable (limit 10%)"
        )
    for rid, reason in unparseable:
        logger.warning("judge reply for %s rejected: %s", rid, reason)

    kept = [rid for rid in batch_ids if rid in parsed]
    scores = ScoreVector(
        name=batch.metric_name,
        kind=ScoreKind.NLG,
        ids=tuple(kept),
        values=[parsed[rid] for rid in kept],
        higher_is_better=True,
    )
    return JudgeParseResult(scores=scores, unparseable=unparseable)


_FLOAT_RE = re.compile(r"\d*\.?\d+(?:[eE][+-]?\d+)?")


def parse_probability_responses(path, ids: Sequence[str]) -> dict[str, float]:
    """Read id -> reply JSONL where each reply contains a probability in [0, 1].

    Used to carry judged truthfulness probabilities into the prompt-based
    uncertainty score.
    """
    path = Path(path)
    wanted = set(ids)
    out: dict[str, float] = {}
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{path.name} line {line_no}: malformed JSON ({exc.msg})") from exc
            rid = obj.get("id")
            if rid not in wanted:
                raise SchemaError(f"{path.name} line {line_no}: unknown id {rid!r}")
            reply = str(obj.get("reply"))
            value = None
            for match in _FLOAT_RE.finditer(reply):
                candidate = float(match.group())
                if 0.0 <= candidate <= 1.0:
                    value = candidate
                    break
            if value is None:
                raise SchemaError(f"{path.name} line {line_no}: no probability in [0, 1] in {reply!r}")
            out[rid] = value
    missing = [rid for rid in ids if rid not in out]
    if missing:
        raise SchemaError(f"{path.name}: missing probabilities for ids {missing}")
    return out
