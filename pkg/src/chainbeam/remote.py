"""HTTP client for remote chain scorers.

Wire protocol: POST {url}/score with
``{"items": [{"head": 1|2, "question": "...", "chain": [{"title", "text"}, ...],
"candidate": {"title", "text"}}]}`` answered by ``{"scores": [...]}`` with one
finite float per item; GET {url}/health answers ``{"status": "ok"}``. A batch
that still fails after the configured retries raises ScorerUnavailable.
"""

from __future__ import annotations

import math
import os
import time
from typing import Sequence

import requests

from .errors import ScorerUnavailable, UsageError
from .scoring import Scorer, ScoreRequest

ENV_SCORER_URL = "CHAINBEAM_SCORER_URL"


def _encode_item(request: ScoreRequest) -> dict:
    return {
        "head": int(request.head),
        "question": request.question.text,
        "chain": [{"title": p.title, "text": p.body} for p in request.prefix],
        "candidate": {"title": request.candidate.title, "text": request.candidate.body},
    }


class RemoteScorer(Scorer):
    """Client for the remote scorer wire protocol.

    The endpoint URL comes from the constructor or falls back to the
    CHAINBEAM_SCORER_URL environment variable. Each score_batch call is one
    POST; concurrent calls from multiple retrievals are independent requests.
    """

    profile = "logit"

    def __init__(
        self,
        url: str | None = None,
        timeout: float = 10.0,
        retries: int = 2,
        backoff: float = 0.2,
    ):
        url = url or os.environ.get(ENV_SCORER_URL)
        if not url:
            raise UsageError(
                f"remote scorer needs a URL (flag/config or {ENV_SCORER_URL})"
            )
        self.url = url.rstrip("/")
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff

    def score_one(self, request: ScoreRequest) -> float:
        return self.score_batch([request])[0]

    def score_batch(self, requests_batch: Sequence[ScoreRequest]) -> list[float]:
        if not requests_batch:
            return []
        payload = {"items": [_encode_item(r) for r in requests_batch]}
        last_error: Exception | None = None
        for attempt in range(self.retries + 1):
            if attempt:
                time.sleep(self.backoff * attempt)
            try:
                response = requests.post(
                    f"{self.url}/score", json=payload, timeout=self.timeout
                )
                response.raise_for_status()
                scores = response.json()["scores"]
                return self._validate(scores, len(requests_batch))
            except (requests.RequestException, KeyError, ValueError) as exc:
                last_error = exc
        raise ScorerUnavailable(
            f"scorer at {self.url} failed after {self.retries + 1} attempts: {last_error}"
        )

    @staticmethod
    def _validate(scores: object, expected: int) -> list[float]:
        if not isinstance(scores, list) or len(scores) != expected:
            raise ValueError(f"expected {expected} scores, got {scores!r:.80}")
        out = [float(s) for s in scores]
        for s in out:
            if not math.isfinite(s):
                raise ValueError(f"non-finite score {s} in response")
        return out

    def healthy(self) -> bool:
        try:
            response = requests.get(f"{self.url}/health", timeout=self.timeout)
            return response.status_code == 200 and response.json().get("status") == "ok"
        except (requests.RequestException, ValueError):
            return False
