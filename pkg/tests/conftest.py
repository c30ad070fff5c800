from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from builders import FIXTURE_DIR
from uqsum.records import parse_record_file


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    return FIXTURE_DIR


@pytest.fixture(scope="session")
def fixture_corpus():
    return parse_record_file(FIXTURE_DIR / "corpus.jsonl")
