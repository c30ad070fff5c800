"""Optional HTTP chat-completion client for executing judge prompt batches.

The reproducible core never talks to the network; this client is the one
component that does, and only when explicitly configured. Requests run at
temperature 0 and retry with exponential backoff on transient failures.
"""

from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import requests

from uqsum.nlg import JudgePromptBatch

logger = logging.getLogger(__name__)

_RETRYABLE_STATUS = {429, 500, 502, 503, 504}


@dataclass
class JudgeClientConfig:
    base_url: str
    model: str
    api_key: str | None = None
    temperature: float = 0.0
    timeout: float = 60.0
    max_retries: int = 4
    backoff_base: float = 1.0
    max_in_flight: int = 4


class JudgeClientError(RuntimeError):
    pass


class JudgeClient:
    def __init__(self, config: JudgeClientConfig, session: requests.Session | None = None):
        self.config = config
        self.session = session or requests.Session()

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.config.api_key:
            headers["Authorization"] = f"Bearer {self.config.api_key}"
        return headers

    def _complete(self, prompt: str) -> str:
        url = self.config.base_url.rstrip("/") + "/chat/completions"
        payload = {
            "model": self.config.model,
            "temperature": self.config.temperature,
            "messages": [{"role": "user", "content": prompt}],
        }
        last_error: Exception | None = None
        for attempt in range(self.config.max_retries + 1):
            if attempt:
                delay = self.config.backoff_base * 2 ** (attempt - 1)
                logger.warning("retrying judge call in %.1fs (attempt %d)", delay, attempt + 1)
                time.sleep(delay)
            try:
                response = self.session.post(
                    url, json=payload, headers=self._headers(), timeout=self.config.timeout
                )
            except requests.RequestException as exc:
                last_error = exc
                continue
            if response.status_code in _RETRYABLE_STATUS:
                last_error = JudgeClientError(f"HTTP {response.status_code}")
                continue
            if response.status_code != 200:
                raise JudgeClientError(f"judge endpoint returned HTTP {response.status_code}")
            try:
                return response.json()["choices"][0]["message"]["content"]
            except (KeyError, IndexError, ValueError) as exc:
                raise JudgeClientError(f"malformed judge response: {exc}") from exc
        raise JudgeClientError(f"judge call failed after retries: {last_error}")

    def run_batch(self, batch: JudgePromptBatch, out_path) -> None:
        """Execute every prompt and write an id -> reply response JSONL."""
        with ThreadPoolExecutor(max_workers=self.config.max_in_flight) as pool:
            replies = list(pool.map(self._complete, [prompt for _, prompt in batch.items]))
        out_path = Path(out_path)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        with out_path.open("w", encoding="utf-8") as fh:
            for (rid, _), reply in zip(batch.items, replies):
                fh.write(json.dumps({"id": rid, "reply": reply}) + "\n")
