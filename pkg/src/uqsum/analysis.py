"""Result assembly: PRR tables, rank-correlation matrices, human experiments."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

import uqsum.prr as prr_mod
from uqsum.nlg import UndefinedCorrelationError, rank_correlation
from uqsum.records import SchemaError, ScoreKind, ScoreVector

ERROR_TYPES = ("EI", "MR", "SOAF", "RE", "TME", "CO", "NMS")


@dataclass
class PrrTable:
    """PRR values with quality metrics as rows and scored methods as columns."""

    row_names: list[str]
    col_names: list[str]
    values: np.ndarray
    col_means: np.ndarray
    row_means: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.row_names), len(self.col_names)):
            raise ValueError("table shape does not match row/column names")


def _check_alignment(vectors: Sequence[ScoreVector]) -> tuple[str, ...]:
    ids = vectors[0].ids
    for vec in vectors[1:]:
        if vec.ids != ids:
            raise ValueError(f"score vector {vec.name!r} is not aligned with {vectors[0].name!r}")
    return ids


def build_prr_table(
    ue_scores: Sequence[ScoreVector],
    nlg_scores: Sequence[ScoreVector],
    alpha: int = prr_mod.DEFAULT_ALPHA,
    seed: int = prr_mod.DEFAULT_SEED,
    random_baseline: str = "monte_carlo",
    with_row_means: bool = False,
) -> PrrTable:
    """Cell (i, j) = PRR of method j against quality metric i, plus column means.

    The oracle and random PR values depend only on the row's quality vector,
    so they are computed once per row and shared across columns; each cell is
    numerically identical to an independent `prr` call with the same seed.
    """
    if not ue_scores or not nlg_scores:
        raise ValueError("both method and metric score lists must be non-empty")
    _check_alignment(list(ue_scores) + list(nlg_scores))
    values = np.empty((len(nlg_scores), len(ue_scores)))
    for i, quality in enumerate(nlg_scores):
        risk = prr_mod.risk_from_nlg(quality)
        oracle = prr_mod.pr_oracle(quality)
        if random_baseline == "monte_carlo":
            random_pr = prr_mod.pr_random_mean(quality, alpha=alpha, seed=seed)
        elif random_baseline == "closed_form":
            random_pr = prr_mod.pr_random_expected(quality)
        else:
            raise ValueError(f"unknown random baseline {random_baseline!r}")
        for j, method in enumerate(ue_scores):
            if method.kind is not ScoreKind.UNCERTAINTY or method.higher_is_better:
                raise ValueError(f"score vector {method.name!r} is not an uncertainty vector")
            values[i, j] = prr_mod._prr_from_parts(
                risk, oracle, random_pr, method.values, alpha, seed
            ).prr
    return PrrTable(
        row_names=[v.name for v in nlg_scores],
        col_names=[v.name for v in ue_scores],
        values=values,
        col_means=values.mean(axis=0),
        row_means=values.mean(axis=1) if with_row_means else None,
    )


class CorrelationAxis(str, Enum):
    BETWEEN_METHODS = "between_methods"
    BETWEEN_METRICS = "between_metrics"


def correlation_matrix(table: PrrTable, axis: CorrelationAxis) -> tuple[list[str], np.ndarray]:
    """Spearman correlation between method columns or metric rows.

    Undefined entries (a constant PRR profile) are reported as NaN so that
    downstream reports can render them as explicit nulls rather than zeros.
    """
    axis = CorrelationAxis(axis)
    if table.values.shape[0] < 2 or table.values.shape[1] < 2:
        raise ValueError("correlation needs at least 2 rows and 2 columns")
    if axis is CorrelationAxis.BETWEEN_METHODS:
        names = list(table.col_names)
        profiles = [table.values[:, j] for j in range(table.values.shape[1])]
    else:
        names = list(table.row_names)
        profiles = [table.values[i, :] for i in range(table.values.shape[0])]
    n = len(profiles)
    matrix = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            try:
                value = rank_correlation(profiles[i], profiles[j], kind="spearman")
            except UndefinedCorrelationError:
                value = math.nan
            matrix[i, j] = matrix[j, i] = value
    return names, matrix


@dataclass
class HumanAnnotation:
    """Erroneous-word counts per error type for one summary."""

    id: str
    total_words: int
    errors: dict[str, int]

    def __post_init__(self) -> None:
        if self.total_words < 1:
            raise SchemaError(f"annotation {self.id!r}: total_words must be >= 1")
        missing = [t for t in ERROR_TYPES if t not in self.errors]
        if missing:
            raise SchemaError(f"annotation {self.id!r}: missing error types {missing}")
        for error_type, count in self.errors.items():
            if error_type not in ERROR_TYPES:
                raise SchemaError(f"annotation {self.id!r}: unknown error type {error_type!r}")
            if not 0 <= count <= self.total_words:
                raise SchemaError(
                    f"annotation {self.id!r}: {error_type} count {count} outside [0, {self.total_words}]"
                )


def human_score(annotation: HumanAnnotation, error_type: str) -> float:
    """Quality in [0, 1]: one minus the erroneous-word ratio for the type."""
    if error_type not in ERROR_TYPES:
        raise ValueError(f"unknown error type {error_type!r}")
    return 1.0 - annotation.errors[error_type] / annotation.total_words


def parse_annotation_file(path) -> dict[str, HumanAnnotation]:
    path = Path(path)
    annotations: dict[str, HumanAnnotation] = {}
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{path.name} line {line_no}: malformed JSON ({exc.msg})") from exc
            try:
                ann = HumanAnnotation(
                    id=obj["id"],
                    total_words=int(obj["total_words"]),
                    errors={k: int(v) for k, v in obj["errors"].items()},
                )
            except (KeyError, TypeError) as exc:
                raise SchemaError(f"{path.name} line {line_no}: malformed annotation ({exc})") from exc
            if ann.id in annotations:
                raise SchemaError(f"{path.name} line {line_no}: duplicate id {ann.id!r}")
            annotations[ann.id] = ann
    return annotations


def human_score_vectors(
    annotations: Mapping[str, HumanAnnotation], ids: Sequence[str]
) -> list[ScoreVector]:
    """One quality vector per error type, aligned to the given id order."""
    missing = [rid for rid in ids if rid not in annotations]
    if missing:
        raise SchemaError(f"annotations missing for ids {missing}")
    return [
        ScoreVector(
            name=error_type,
            kind=ScoreKind.HUMAN,
            ids=tuple(ids),
            values=[human_score(annotations[rid], error_type) for rid in ids],
            higher_is_better=True,
        )
        for error_type in ERROR_TYPES
    ]


class ExperimentKind(str, Enum):
    UE_NLG = "UE_NLG"
    UE_HUM = "UE_HUM"
    NLG_HUM = "NLG_HUM"


def negated_quality_vectors(nlg_scores: Sequence[ScoreVector]) -> list[ScoreVector]:
    """Quality vectors flipped into the uncertainty role (higher = worse)."""
    return [
        ScoreVector(
            name=f"-{vec.name}",
            kind=ScoreKind.UNCERTAINTY,
            ids=vec.ids,
            values=[-v for v in vec.values],
            higher_is_better=False,
        )
        for vec in nlg_scores
    ]


def run_experiment(
    kind: ExperimentKind,
    *,
    ue_scores: Sequence[ScoreVector] | None = None,
    nlg_scores: Sequence[ScoreVector] | None = None,
    annotations: Mapping[str, HumanAnnotation] | None = None,
    alpha: int = prr_mod.DEFAULT_ALPHA,
    seed: int = prr_mod.DEFAULT_SEED,
    random_baseline: str = "monte_carlo",
) -> PrrTable:
    """Assemble the PRR table for one experiment type.

    UE_NLG scores methods against quality metrics; UE_HUM uses the per-type
    human quality vectors as rows; NLG_HUM plays each negated quality metric
    in the uncertainty role against human quality.
    """
    kind = ExperimentKind(kind)
    if kind is ExperimentKind.UE_NLG:
        if not ue_scores or not nlg_scores:
            raise ValueError("UE_NLG needs method and metric score vectors")
        return build_prr_table(ue_scores, nlg_scores, alpha, seed, random_baseline)
    if annotations is None:
        raise ValueError(f"{kind.value} needs human annotations")
    if kind is ExperimentKind.UE_HUM:
        if not ue_scores:
            raise ValueError("UE_HUM needs method score vectors")
        human = human_score_vectors(annotations, ue_scores[0].ids)
        return build_prr_table(ue_scores, human, alpha, seed, random_baseline, with_row_means=True)
    if not nlg_scores:
        raise ValueError("NLG_HUM needs metric score vectors")
    human = human_score_vectors(annotations, nlg_scores[0].ids)
    negated = negated_quality_vectors(nlg_scores)
    return build_prr_table(negated, human, alpha, seed, random_baseline, with_row_means=True)
