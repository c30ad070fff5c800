from __future__ import annotations

import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tiny_model import DOCS, build_tiny_model


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory) -> Path:
    target = tmp_path_factory.mktemp("tiny-model")
    build_tiny_model(target)
    return target


@pytest.fixture(scope="session")
def inputs_file(tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("inputs") / "docs.jsonl"
    path.write_text("".join(json.dumps(doc) + "\n" for doc in DOCS), encoding="utf-8")
    return path
