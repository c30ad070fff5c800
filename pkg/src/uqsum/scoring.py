"""Corpus-level scoring: run selected methods and metrics with skip reporting.

A method that needs record fields the corpus does not carry is skipped with a
machine-readable reason code instead of failing the run.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Sequence

from uqsum import blackbox, whitebox
from uqsum.nlg import embedding_semantic_overlap, rouge_l
from uqsum.records import GenerationRecord, SchemaError, ScoreKind, ScoreVector, corpus_ids

WHITEBOX_METHODS = ("MSP", "MTE", "MCSE", "MD", "RDE", "T-TU", "T-RMI", "S-TU", "S-RMI", "P(True)")
BLACKBOX_METHODS = ("NumSets", "ECC", "LexSim", "EigV")
KNOWN_METHODS = WHITEBOX_METHODS + BLACKBOX_METHODS
NATIVE_METRICS = ("ROUGE-L", "Spearman", "Kendall-Tau")


@dataclass
class Skip:
    name: str
    reason_code: str
    detail: str = ""


def load_embedding_file(path) -> list[list[float]]:
    """JSONL with one {"embedding": [...]} object per line."""
    vectors = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{path} line {line_no}: malformed JSON ({exc.msg})") from exc
            if "embedding" not in obj:
                raise SchemaError(f"{path} line {line_no}: missing embedding field")
            vectors.append([float(v) for v in obj["embedding"]])
    if not vectors:
        raise SchemaError(f"{path}: no embeddings found")
    dims = {len(v) for v in vectors}
    if len(dims) != 1:
        raise SchemaError(f"{path}: inconsistent embedding dimensions {sorted(dims)}")
    return vectors


def load_keyed_embedding_file(path) -> dict[str, list[float]]:
    """JSONL with one {"id": ..., "embedding": [...]} object per line."""
    vectors: dict[str, list[float]] = {}
    with Path(path).open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{path} line {line_no}: malformed JSON ({exc.msg})") from exc
            if "id" not in obj or "embedding" not in obj:
                raise SchemaError(f"{path} line {line_no}: missing id or embedding field")
            vectors[obj["id"]] = [float(v) for v in obj["embedding"]]
    return vectors


def _all_have(records: Sequence[GenerationRecord], predicate: Callable[[GenerationRecord], bool]) -> bool:
    return all(predicate(r) for r in records)


def _sample_texts(record: GenerationRecord) -> list[str]:
    return [s.text for s in record.samples]


def compute_method_scores(
    records: Sequence[GenerationRecord],
    methods: Sequence[str],
    *,
    train_embeddings: Sequence[Sequence[float]] | None = None,
    p_true: Mapping[str, float] | None = None,
    set_threshold: float = 0.5,
    variance_kept: float = 0.95,
) -> tuple[list[ScoreVector], list[Skip]]:
    """Score the corpus with each selected uncertainty method.

    Returns the computed vectors plus one Skip entry per method that could not
    run, each with a stable reason code.
    """
    ids = corpus_ids(records)
    vectors: list[ScoreVector] = []
    skips: list[Skip] = []

    density_model = None
    density_pca_model = None

    def skip(name: str, code: str, detail: str = "") -> None:
        skips.append(Skip(name, code, detail))

    for name in methods:
        if name not in KNOWN_METHODS:
            skip(name, "unknown_method", f"not one of {KNOWN_METHODS}")
            continue
        values: list[float] | None = None
        if name == "MSP":
            values = [whitebox.msp(r) for r in records]
        elif name == "MTE":
            if not _all_have(records, lambda r: r.greedy_token_entropies is not None or r.ensemble is not None):
                skip(name, "missing_token_entropies", "no greedy_token_entropies or ensemble")
            else:
                values = [whitebox.mte(r) for r in records]
        elif name == "MCSE":
            if not _all_have(records, lambda r: bool(r.samples) and all(s.token_logprobs for s in r.samples)):
                skip(name, "missing_sample_logprobs", "samples with token_logprobs required")
            else:
                values = [whitebox.mcse(r) for r in records]
        elif name in ("MD", "RDE"):
            if train_embeddings is None:
                skip(name, "missing_training_embeddings")
            elif not _all_have(records, lambda r: r.embedding is not None):
                skip(name, "missing_embeddings")
            else:
                if name == "MD":
                    if density_model is None:
                        density_model = whitebox.fit_density(train_embeddings, use_pca=False)
                    model = density_model
                else:
                    if density_pca_model is None:
                        density_pca_model = whitebox.fit_density(
                            train_embeddings, use_pca=True, variance_kept=variance_kept
                        )
                    model = density_pca_model
                values = [whitebox.mahalanobis(r.embedding, model) for r in records]
        elif name in ("T-TU", "T-RMI"):
            if not _all_have(records, lambda r: r.ensemble is not None and bool(r.ensemble.token_distributions)):
                skip(name, "missing_ensemble")
            else:
                fn = whitebox.token_total_uncertainty if name == "T-TU" else whitebox.token_rmi
                values = [fn(r.ensemble) for r in records]
        elif name in ("S-TU", "S-RMI"):
            ok = _all_have(
                records,
                lambda r: bool(r.samples)
                and all(s.ensemble_seq_logprobs is not None and s.token_logprobs for s in r.samples),
            )
            if not ok:
                skip(name, "missing_member_seq_logprobs", "samples with ensemble_seq_logprobs required")
            else:
                fn = whitebox.seq_total_uncertainty if name == "S-TU" else whitebox.seq_rmi
                values = [fn(r) for r in records]
        elif name == "P(True)":
            if p_true is None or any(rid not in p_true for rid in ids):
                skip(name, "missing_p_true_responses")
            else:
                values = [whitebox.p_true_uncertainty(p_true[rid]) for rid in ids]
        else:  # black-box methods
            if not _all_have(records, lambda r: len(r.samples) >= 2):
                skip(name, "missing_samples", "at least 2 sampled generations required")
            else:
                values = []
                for record in records:
                    texts = _sample_texts(record)
                    if name == "LexSim":
                        values.append(blackbox.lexsim(texts))
                    else:
                        graph = blackbox.pairwise_similarity(texts)
                        if name == "NumSets":
                            values.append(float(blackbox.num_sets(graph, threshold=set_threshold)))
                        elif name == "EigV":
                            values.append(blackbox.eigv(graph))
                        else:
                            values.append(blackbox.ecc(graph))
        if values is not None:
            vectors.append(
                ScoreVector(name=name, kind=ScoreKind.UNCERTAINTY, ids=ids, values=values, higher_is_better=False)
            )
    return vectors, skips


def compute_native_metric_scores(
    records: Sequence[GenerationRecord],
    metrics: Sequence[str],
    *,
    reference_embeddings: Mapping[str, Sequence[float]] | None = None,
) -> tuple[list[ScoreVector], list[Skip]]:
    """Compute the natively supported quality metrics over the corpus."""
    ids = corpus_ids(records)
    vectors: list[ScoreVector] = []
    skips: list[Skip] = []
    for name in metrics:
        if name not in NATIVE_METRICS:
            skips.append(Skip(name, "unknown_metric", f"not one of {NATIVE_METRICS}"))
            continue
        if name == "ROUGE-L":
            if not _all_have(records, lambda r: bool(r.reference_summary)):
                skips.append(Skip(name, "missing_reference_summary"))
                continue
            values = [rouge_l(r.greedy_text, r.reference_summary) for r in records]
        else:
            kind = "spearman" if name == "Spearman" else "kendall"
            if not _all_have(records, lambda r: r.embedding is not None):
                skips.append(Skip(name, "missing_embeddings"))
                continue
            if reference_embeddings is None or any(r.id not in reference_embeddings for r in records):
                skips.append(Skip(name, "missing_reference_embeddings"))
                continue
            values = [
                embedding_semantic_overlap(r.embedding, reference_embeddings[r.id], kind=kind)
                for r in records
            ]
        if any(math.isnan(v) for v in values):
            skips.append(Skip(name, "undefined_scores", "metric produced NaN"))
            continue
        vectors.append(ScoreVector(name=name, kind=ScoreKind.NLG, ids=ids, values=values, higher_is_better=True))
    return vectors, skips


def write_score_file(vector: ScoreVector, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with tmp.open("w", encoding="utf-8") as fh:
        for rid, value in zip(vector.ids, vector.values):
            fh.write(json.dumps({"id": rid, "score": value}) + "\n")
    tmp.replace(path)


def read_score_file(path, name: str, kind: ScoreKind, higher_is_better: bool) -> ScoreVector:
    ids = []
    values = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{path} line {line_no}: malformed JSON ({exc.msg})") from exc
            ids.append(obj["id"])
            values.append(float(obj["score"]))
    return ScoreVector(name=name, kind=kind, ids=tuple(ids), values=values, higher_is_better=higher_is_better)
