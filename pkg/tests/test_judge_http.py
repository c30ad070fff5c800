from __future__ import annotations

import json

import pytest
import requests

from builders import make_record
from uqsum.judge_http import JudgeClient, JudgeClientConfig, JudgeClientError
from uqsum.nlg import Dimension, JudgeVariant, emit_judge_prompts


class FakeResponse:
    def __init__(self, status_code=200, content="4"):
        self.status_code = status_code
        self._content = content

    def json(self):
        return {"choices": [{"message": {"content": self._content}}]}


class FakeSession:
    def __init__(self, outcomes):
        self.outcomes = list(outcomes)
        self.calls = []

    def post(self, url, json=None, headers=None, timeout=None):
        self.calls.append({"url": url, "json": json, "headers": headers})
        outcome = self.outcomes.pop(0)
        if isinstance(outcome, Exception):
            raise outcome
        return outcome


def _config(**kwargs):
    defaults = dict(base_url="http://judge.local/v1", model="judge-1", backoff_base=0.0)
    defaults.update(kwargs)
    return JudgeClientConfig(**defaults)


def _batch(n=2):
    records = [make_record(rid=f"r{i}") for i in range(n)]
    return emit_judge_prompts(records, JudgeVariant.WO, Dimension.OVERALL)


class TestJudgeClient:
    def test_writes_response_jsonl(self, tmp_path):
        session = FakeSession([FakeResponse(content="3"), FakeResponse(content="5")])
        client = JudgeClient(_config(max_in_flight=1), session=session)
        out = tmp_path / "replies.jsonl"
        client.run_batch(_batch(), out)
        lines = [json.loads(line) for line in out.read_text().splitlines()]
        assert lines == [{"id": "r0", "reply": "3"}, {"id": "r1", "reply": "5"}]
        assert session.calls[0]["json"]["temperature"] == 0.0
        assert session.calls[0]["url"] == "http://judge.local/v1/chat/completions"

    def test_auth_header_when_key_present(self, tmp_path):
        session = FakeSession([FakeResponse()] * 2)
        client = JudgeClient(_config(api_key="secret", max_in_flight=1), session=session)
        client.run_batch(_batch(), tmp_path / "r.jsonl")
        assert session.calls[0]["headers"]["Authorization"] == "Bearer secret"

    def test_retries_transient_failures(self, tmp_path):
        session = FakeSession(
            [
                FakeResponse(status_code=500),
                requests.ConnectionError("boom"),
                FakeResponse(content="2"),
            ]
        )
        client = JudgeClient(_config(max_in_flight=1, max_retries=3), session=session)
        client.run_batch(_batch(1), tmp_path / "r.jsonl")
        assert len(session.calls) == 3

    def test_gives_up_after_max_retries(self, tmp_path):
        session = FakeSession([FakeResponse(status_code=503)] * 3)
        client = JudgeClient(_config(max_in_flight=1, max_retries=2), session=session)
        with pytest.raises(JudgeClientError, match="after retries"):
            client.run_batch(_batch(1), tmp_path / "r.jsonl")

    def test_non_retryable_status_raises_immediately(self, tmp_path):
        session = FakeSession([FakeResponse(status_code=401)])
        client = JudgeClient(_config(max_in_flight=1), session=session)
        with pytest.raises(JudgeClientError, match="401"):
            client.run_batch(_batch(1), tmp_path / "r.jsonl")
