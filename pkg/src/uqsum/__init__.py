"""Evaluation engine for uncertainty estimation on generated summaries.

The package scores generation records with white-box and black-box
uncertainty methods, computes or ingests quality metrics, and evaluates
every (method, metric) pair with the prediction rejection ratio.
"""

from uqsum.numerics import minmax_normalize, rank_ascending
from uqsum.records import (
    EnsembleBlock,
    GenerationRecord,
    SampledGeneration,
    SchemaError,
    ScoreKind,
    ScoreVector,
    parse_record_file,
    validate_record,
    write_record_file,
)

__all__ = [
    "EnsembleBlock",
    "GenerationRecord",
    "SampledGeneration",
    "SchemaError",
    "ScoreKind",
    "ScoreVector",
    "minmax_normalize",
    "parse_record_file",
    "rank_ascending",
    "validate_record",
    "write_record_file",
]

__version__ = "0.1.0"
