"""Produce schema-valid generation-record JSONL from a causal language model."""

from record_extractor.config import ExtractionConfig
from record_extractor.extract import ExtractionError, extract_to_file
from record_extractor.schema import self_check, validate_record_object

__all__ = [
    "ExtractionConfig",
    "ExtractionError",
    "extract_to_file",
    "self_check",
    "validate_record_object",
]

__version__ = "0.1.0"
